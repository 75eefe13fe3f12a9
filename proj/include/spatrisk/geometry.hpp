#pragma once

#include <cmath>
#include <vector>

#include "spatrisk/error.hpp"

// Regions (disk, square, convex polygon), homotheties, the exact densities
// of the distance between two independent uniform points on a disk/square,
// and set covariances |A \cap (A+z)| used by the lag-space double integral.

namespace spatrisk {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

enum class Shape { Disk, Square };

/// Disk of radius r or square of side r, centered at `center` (the
/// barycenter, which is also the homothety center).
struct Region {
    Shape shape = Shape::Disk;
    double r = 1.0;
    Vec2 center{0.0, 0.0};

    void validate() const {
        if (!(r > 0.0)) throw ParameterError("Region: characteristic size must be > 0");
    }
};

struct Homothety {
    Region base;
    double lambda = 1.0;

    void validate() const {
        base.validate();
        if (!(lambda > 0.0)) throw ParameterError("Homothety: ratio must be > 0");
    }
};

/// Area of lambda*A.
inline double region_area(const Region& region, double lambda = 1.0) {
    region.validate();
    if (!(lambda > 0.0)) throw ParameterError("region_area: lambda must be > 0");
    const double s = lambda * region.r;
    return region.shape == Shape::Disk ? M_PI * s * s : s * s;
}

/// Largest distance between two points of lambda*A.
inline double max_pair_distance(const Region& region, double lambda = 1.0) {
    region.validate();
    const double s = lambda * region.r;
    return region.shape == Shape::Disk ? 2.0 * s : M_SQRT2 * s;
}

/// Area of the intersection of two discs of common radius r_b whose
/// centers are h apart. Zero for h >= 2 r_b; the boundary belongs to the
/// overlap branch, where the formula vanishes anyway.
inline double disc_intersection_area(double h, double r_b) {
    if (!(r_b > 0.0)) throw ParameterError("disc_intersection_area: r_b must be > 0");
    if (!(h >= 0.0)) throw ParameterError("disc_intersection_area: h must be >= 0");
    if (h >= 2.0 * r_b) return 0.0;
    const double root = std::sqrt(4.0 * r_b * r_b - h * h);
    double arg = root / (2.0 * r_b);
    if (arg > 1.0) arg = 1.0;
    return 2.0 * (r_b * r_b * std::asin(arg) - 0.25 * h * root);
}

/// Density of the distance between two independent uniform points on A
/// (disk of radius R or square of side R). Out-of-support h yields 0.
///
/// The square's second branch is evaluated in a simplified form: the two
/// terms of the textbook expression that diverge at b = h^2/R^2 -> 1+
/// satisfy (b+1)/sqrt(b-1) - 4/(b sqrt(1-(2-b)^2/b^2)) = sqrt(b-1)
/// identically, so the density reduces to a finite expression on the
/// whole branch and is continuous at h = R.
inline double distance_density(const Region& region, double h) {
    region.validate();
    if (!(h >= 0.0) || !std::isfinite(h)) return 0.0;
    const double R = region.r;
    if (region.shape == Shape::Disk) {
        if (h <= 0.0 || h >= 2.0 * R) return 0.0;
        const double t = h / (2.0 * R);
        return (2.0 * h / (R * R)) *
               ((2.0 / M_PI) * std::acos(t) -
                (h / (M_PI * R)) * std::sqrt(1.0 - t * t));
    }
    // Square
    if (h <= 0.0 || h >= M_SQRT2 * R) return 0.0;
    if (h <= R) {
        return 2.0 * M_PI * h / (R * R) - 8.0 * h * h / (R * R * R) +
               2.0 * h * h * h / (R * R * R * R);
    }
    const double b = h * h / (R * R);
    const double bracket = -2.0 - b + 4.0 * std::sqrt(b - 1.0) +
                           2.0 * std::asin((2.0 - b) / b);
    return bracket * 2.0 * h / (R * R);
}

/// Density of the pair distance on lambda*A, computed through the scaling
/// identity f(lambda h, lambda R) = f(h, R) / lambda.
inline double distance_density_scaled(const Region& region, double lambda, double h) {
    if (!(lambda > 0.0)) throw ParameterError("distance_density_scaled: lambda must be > 0");
    return distance_density(region, h / lambda) / lambda;
}

/// Convex polygon, counter-clockwise vertices.
struct ConvexPolygon {
    std::vector<Vec2> vertices;

    double area() const {
        double a = 0.0;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& p = vertices[i];
            const Vec2& q = vertices[(i + 1) % n];
            a += p.x * q.y - q.x * p.y;
        }
        return 0.5 * a;
    }

    Vec2 centroid() const {
        double a = 0.0, cx = 0.0, cy = 0.0;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& p = vertices[i];
            const Vec2& q = vertices[(i + 1) % n];
            const double cross = p.x * q.y - q.x * p.y;
            a += cross;
            cx += (p.x + q.x) * cross;
            cy += (p.y + q.y) * cross;
        }
        a *= 0.5;
        return {cx / (6.0 * a), cy / (6.0 * a)};
    }

    ConvexPolygon homothety(double lambda) const {
        const Vec2 c = centroid();
        ConvexPolygon out;
        out.vertices.reserve(vertices.size());
        for (const Vec2& v : vertices) out.vertices.push_back(c + lambda * (v - c));
        return out;
    }

    ConvexPolygon translated(Vec2 v) const {
        ConvexPolygon out;
        out.vertices.reserve(vertices.size());
        for (const Vec2& p : vertices) out.vertices.push_back(p + v);
        return out;
    }

    double max_pair_distance() const {
        double best = 0.0;
        for (std::size_t i = 0; i < vertices.size(); ++i)
            for (std::size_t j = i + 1; j < vertices.size(); ++j)
                best = std::max(best, norm(vertices[i] - vertices[j]));
        return best;
    }
};

inline ConvexPolygon square_polygon(double side, Vec2 center) {
    const double s = 0.5 * side;
    return ConvexPolygon{{{center.x - s, center.y - s},
                          {center.x + s, center.y - s},
                          {center.x + s, center.y + s},
                          {center.x - s, center.y + s}}};
}

namespace geom_detail {

// Sutherland-Hodgman clip of a convex subject polygon by the half-plane
// left of edge (a -> b).
inline void clip_halfplane(std::vector<Vec2>& poly, Vec2 a, Vec2 b,
                           std::vector<Vec2>& scratch) {
    scratch.clear();
    const std::size_t n = poly.size();
    if (n == 0) return;
    const Vec2 e = b - a;
    auto side = [&](const Vec2& p) { return e.x * (p.y - a.y) - e.y * (p.x - a.x); };
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        const double sp = side(p);
        const double sq = side(q);
        if (sp >= 0.0) scratch.push_back(p);
        if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
            const double t = sp / (sp - sq);
            scratch.push_back(p + t * (q - p));
        }
    }
    poly.swap(scratch);
}

} // namespace geom_detail

/// Area of P \cap Q for convex polygons.
inline double convex_intersection_area(const ConvexPolygon& p, const ConvexPolygon& q) {
    std::vector<Vec2> poly = p.vertices;
    std::vector<Vec2> scratch;
    const std::size_t n = q.vertices.size();
    for (std::size_t i = 0; i < n && !poly.empty(); ++i)
        geom_detail::clip_halfplane(poly, q.vertices[i], q.vertices[(i + 1) % n], scratch);
    if (poly.size() < 3) return 0.0;
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& u = poly[i];
        const Vec2& v = poly[(i + 1) % poly.size()];
        a += u.x * v.y - v.x * u.y;
    }
    return 0.5 * std::fabs(a);
}

/// Set covariance |P \cap (P + z)|.
inline double set_covariance(const ConvexPolygon& p, Vec2 z) {
    return convex_intersection_area(p, p.translated(z));
}

/// Set covariance of lambda*A for a Region. The disk case is the lens
/// area of two equal discs; the square case goes through the polygon
/// clipper in absolute coordinates.
inline double set_covariance(const Region& region, double lambda, Vec2 z) {
    const double s = lambda * region.r;
    if (region.shape == Shape::Disk) {
        const double d = norm(z);
        return d >= 2.0 * s ? 0.0 : disc_intersection_area(d, s);
    }
    return set_covariance(square_polygon(s, region.center), z);
}

} // namespace spatrisk
