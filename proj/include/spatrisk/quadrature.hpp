#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "spatrisk/error.hpp"

// Deterministic adaptive quadrature.
//
// Panels are refined largest-error-first using an embedded Gauss-Legendre
// 7/15 pair; the final value is a fixed-order (left-to-right) sum over
// panels so that results do not depend on refinement scheduling.

namespace spatrisk {

namespace quad_detail {

struct NodeWeight {
    double x;
    double w;
};

inline constexpr std::array<NodeWeight, 7> kGauss7{{
    {-0.94910791234275852453, 0.12948496616886969327},
    {-0.74153118559939443986, 0.27970539148927666790},
    {-0.40584515137739716691, 0.38183005050511894495},
    {0.0, 0.41795918367346938776},
    {0.40584515137739716691, 0.38183005050511894495},
    {0.74153118559939443986, 0.27970539148927666790},
    {0.94910791234275852453, 0.12948496616886969327},
}};

inline constexpr std::array<NodeWeight, 15> kGauss15{{
    {-0.98799251802048542849, 0.030753241996117268355},
    {-0.93727339240070590431, 0.070366047488108124709},
    {-0.84820658341042721620, 0.10715922046717193501},
    {-0.72441773136017004742, 0.13957067792615431445},
    {-0.57097217260853884754, 0.16626920581699393355},
    {-0.39415134707756336990, 0.18616100001556221103},
    {-0.20119409399743452230, 0.19843148532711157646},
    {0.0, 0.20257824192556127288},
    {0.20119409399743452230, 0.19843148532711157646},
    {0.39415134707756336990, 0.18616100001556221103},
    {0.57097217260853884754, 0.16626920581699393355},
    {0.72441773136017004742, 0.13957067792615431445},
    {0.84820658341042721620, 0.10715922046717193501},
    {0.93727339240070590431, 0.070366047488108124709},
    {0.98799251802048542849, 0.030753241996117268355},
}};

template <class F>
void eval_panel(const F& f, double a, double b, double& value, double& error) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s7 = 0.0, s15 = 0.0;
    for (const auto& nw : kGauss7) s7 += nw.w * f(mid + half * nw.x);
    for (const auto& nw : kGauss15) s15 += nw.w * f(mid + half * nw.x);
    value = half * s15;
    error = std::fabs(half * (s15 - s7));
}

struct Panel {
    double a, b, value, error;
};

} // namespace quad_detail

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;   // a-posteriori estimate (sum of panel pair-differences)
    std::size_t panels = 0;
    bool converged = false;
};

struct QuadratureOptions {
    double abs_tol = 1e-9;
    std::size_t max_panels = 20000;
};

/// Integrate f over [a,b]. `breakpoints` marks interior kinks (branch
/// points of densities, tube support edges) that seed the initial panels.
template <class F>
QuadratureResult integrate(const F& f, double a, double b,
                           const QuadratureOptions& opts = {},
                           const std::vector<double>& breakpoints = {}) {
    QuadratureResult res;
    if (!(b > a)) {
        res.converged = true;
        return res;
    }

    std::vector<double> edges;
    edges.push_back(a);
    for (double c : breakpoints)
        if (c > a && c < b) edges.push_back(c);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<quad_detail::Panel> panels;
    panels.reserve(64);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        quad_detail::Panel p{edges[i], edges[i + 1], 0.0, 0.0};
        quad_detail::eval_panel(f, p.a, p.b, p.value, p.error);
        panels.push_back(p);
    }

    auto total_error = [&panels]() {
        double e = 0.0;
        for (const auto& p : panels) e += p.error;
        return e;
    };

    while (total_error() > opts.abs_tol && panels.size() < opts.max_panels) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].error > panels[worst].error) worst = i;
        const quad_detail::Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) break; // interval at roundoff width
        quad_detail::Panel left{p.a, mid, 0.0, 0.0};
        quad_detail::Panel right{mid, p.b, 0.0, 0.0};
        quad_detail::eval_panel(f, left.a, left.b, left.value, left.error);
        quad_detail::eval_panel(f, right.a, right.b, right.value, right.error);
        panels[worst] = left;
        panels.push_back(right);
    }

    std::sort(panels.begin(), panels.end(),
              [](const quad_detail::Panel& x, const quad_detail::Panel& y) {
                  return x.a < y.a;
              });
    for (const auto& p : panels) {
        res.value += p.value;
        res.error += p.error;
    }
    res.panels = panels.size();
    res.converged = res.error <= opts.abs_tol;
    return res;
}

/// As integrate(), but throws QuadratureError on non-convergence.
template <class F>
QuadratureResult integrate_or_throw(const F& f, double a, double b,
                                    const QuadratureOptions& opts = {},
                                    const std::vector<double>& breakpoints = {}) {
    QuadratureResult res = integrate(f, a, b, opts, breakpoints);
    if (!res.converged)
        throw QuadratureError("quadrature did not reach tolerance in budget");
    return res;
}

// 2-D adaptive tensor quadrature on rectangles.

struct Rect {
    double x0, x1, y0, y1;
};

namespace quad_detail {

template <class F>
void eval_rect(const F& f, const Rect& r, double& value, double& error) {
    const double mx = 0.5 * (r.x0 + r.x1), hx = 0.5 * (r.x1 - r.x0);
    const double my = 0.5 * (r.y0 + r.y1), hy = 0.5 * (r.y1 - r.y0);
    // Rows of the 15x15 tensor rule; the 7x7 rule uses its own nodes.
    double s15 = 0.0;
    for (const auto& ni : kGauss15) {
        double row = 0.0;
        const double x = mx + hx * ni.x;
        for (const auto& nj : kGauss15) row += nj.w * f(x, my + hy * nj.x);
        s15 += ni.w * row;
    }
    double s7 = 0.0;
    for (const auto& ni : kGauss7) {
        double row = 0.0;
        const double x = mx + hx * ni.x;
        for (const auto& nj : kGauss7) row += nj.w * f(x, my + hy * nj.x);
        s7 += ni.w * row;
    }
    value = hx * hy * s15;
    error = std::fabs(hx * hy * (s15 - s7));
}

struct RectPanel {
    Rect r;
    double value, error;
};

} // namespace quad_detail

struct Quadrature2DOptions {
    double abs_tol = 1e-8;
    std::size_t max_panels = 4000;
};

/// Integrate f(x, y) over a union of rectangles (typically the four
/// quadrants around a kink at the origin of the lag plane).
template <class F>
QuadratureResult integrate2d(const F& f, const std::vector<Rect>& cells,
                             const Quadrature2DOptions& opts = {}) {
    QuadratureResult res;
    std::vector<quad_detail::RectPanel> panels;
    panels.reserve(cells.size() * 8);
    for (const Rect& c : cells) {
        if (!(c.x1 > c.x0) || !(c.y1 > c.y0)) continue;
        quad_detail::RectPanel p{c, 0.0, 0.0};
        quad_detail::eval_rect(f, p.r, p.value, p.error);
        panels.push_back(p);
    }

    auto total_error = [&panels]() {
        double e = 0.0;
        for (const auto& p : panels) e += p.error;
        return e;
    };

    while (total_error() > opts.abs_tol && panels.size() < opts.max_panels) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].error > panels[worst].error) worst = i;
        const Rect r = panels[worst].r;
        Rect a = r, b = r;
        if (r.x1 - r.x0 >= r.y1 - r.y0) {
            const double mx = 0.5 * (r.x0 + r.x1);
            if (mx <= r.x0 || mx >= r.x1) break;
            a.x1 = mx;
            b.x0 = mx;
        } else {
            const double my = 0.5 * (r.y0 + r.y1);
            if (my <= r.y0 || my >= r.y1) break;
            a.y1 = my;
            b.y0 = my;
        }
        quad_detail::RectPanel pa{a, 0.0, 0.0}, pb{b, 0.0, 0.0};
        quad_detail::eval_rect(f, pa.r, pa.value, pa.error);
        quad_detail::eval_rect(f, pb.r, pb.value, pb.error);
        panels[worst] = pa;
        panels.push_back(pb);
    }

    std::sort(panels.begin(), panels.end(),
              [](const quad_detail::RectPanel& u, const quad_detail::RectPanel& v) {
                  return u.r.x0 != v.r.x0 ? u.r.x0 < v.r.x0
                       : (u.r.y0 != v.r.y0 ? u.r.y0 < v.r.y0 : u.r.x1 < v.r.x1);
              });
    for (const auto& p : panels) {
        res.value += p.value;
        res.error += p.error;
    }
    res.panels = panels.size();
    res.converged = res.error <= opts.abs_tol;
    return res;
}

} // namespace spatrisk
