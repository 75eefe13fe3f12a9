#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "spatrisk/error.hpp"
#include "spatrisk/geometry.hpp"
#include "spatrisk/models.hpp"
#include "spatrisk/parallel.hpp"
#include "spatrisk/quadrature.hpp"
#include "spatrisk/special.hpp"

// The risk engine: exact/quadrature evaluation of the spatial risk
// measures of normalized threshold-exceedance losses of simple max-stable
// fields. R1 is the expectation, R2(lambda A) the variance, and the VaR
// asymptotics follow from the central limit theorem.

namespace spatrisk {

enum class RiskKind { Expectation, Variance, VaR };

struct RiskQuery {
    ExtremalModel model;
    Region region;
    double u = 1.0;       // threshold on the Frechet scale
    RiskKind kind = RiskKind::Variance;
    double alpha = 0.9;   // VaR level; meaningful for kind == VaR only

    void validate() const {
        region.validate();
        if (!(u > 0.0)) throw ParameterError("RiskQuery: threshold u must be > 0");
        if (kind == RiskKind::VaR && !(alpha > 0.0 && alpha < 1.0))
            throw ParameterError("RiskQuery: alpha must lie in (0,1)");
    }
};

struct GevParams {
    double mu = 0.0;
    double sigma = 1.0;
    double xi = 0.0;

    void validate() const {
        if (!(sigma > 0.0)) throw ParameterError("GEV: scale sigma must be > 0");
    }
};

enum class Provenance { Quadrature1D, Quadrature2D, MonteCarlo };

struct RiskCurve {
    std::vector<double> lambdas;
    std::vector<double> values;
    std::vector<double> err;
    std::optional<double> limit;
    Provenance provenance = Provenance::Quadrature1D;
};

struct HomogeneityConstants {
    double k1 = 0.0;
    double k2 = 0.0;
    double order = 0.0; // signed, e.g. -2 for the variance
};

/// R1 = 1 - exp(-1/u); independent of the region (order-0 homogeneity).
inline double r1_expectation(double u) {
    if (!(u > 0.0)) throw ParameterError("r1_expectation: u must be > 0");
    return -std::expm1(-1.0 / u);
}

namespace risk_detail {

struct ValueWithError {
    double value;
    double error;
};

inline double floor_roundoff(double v) {
    if (v < 0.0 && v > -1e-12) return 0.0;
    if (v > 0.25 && v < 0.25 + 1e-9) return 0.25;
    return v;
}

inline void check_variance_range(double v) {
    if (v < 0.0 || v > 0.25)
        throw ConsistencyError("variance outside [0, 1/4]: " + std::to_string(v));
}

inline ValueWithError r2_1d(const ExtremalModel& model, const Region& region,
                            double lambda, double u, const QuadratureOptions& opts) {
    if (!has_isotropic_theta(model))
        throw ParameterError("r2_variance_1d needs an isotropic extremal coefficient");
    region.validate();
    if (!(lambda > 0.0)) throw ParameterError("r2_variance_1d: lambda must be > 0");
    if (!(u > 0.0)) throw ParameterError("r2_variance_1d: u must be > 0");

    const double upper = max_pair_distance(region);
    std::vector<double> breaks;
    if (region.shape == Shape::Square) breaks.push_back(region.r);
    if (const auto* tube = model.as<TubeModel>()) {
        const double edge = 2.0 * tube->r_b / lambda;
        if (edge < upper) breaks.push_back(edge);
    }

    auto integrand = [&](double h) {
        return distance_density(region, h) *
               std::exp(-extremal_coefficient(model, lambda * h) / u);
    };
    const QuadratureResult q = integrate_or_throw(integrand, 0.0, upper, opts, breaks);
    const double v = floor_roundoff(q.value - std::exp(-2.0 / u));
    check_variance_range(v);
    return {v, q.error};
}

template <class Covariance>
inline ValueWithError r2_lag_integral(const ExtremalModel& model, double u,
                                      double area, double diameter, Vec2 kink,
                                      const Covariance& cov,
                                      const Quadrature2DOptions& opts) {
    const double e2 = std::exp(-2.0 / u);
    auto integrand = [&](double zx, double zy) {
        const Vec2 z{zx, zy};
        const double c = cov(z);
        if (c <= 0.0) return 0.0;
        return (std::exp(-extremal_coefficient_lag(model, z) / u) - e2) * c;
    };
    // Quadrant split at the lag-space kink (z = 0 shifted by numerical
    // center `kink`, which is 0 for the shapes used here).
    const double D = diameter;
    std::vector<Rect> cells = {
        {kink.x - D, kink.x, kink.y - D, kink.y},
        {kink.x, kink.x + D, kink.y - D, kink.y},
        {kink.x - D, kink.x, kink.y, kink.y + D},
        {kink.x, kink.x + D, kink.y, kink.y + D},
    };
    Quadrature2DOptions scaled = opts;
    scaled.abs_tol = opts.abs_tol * area * area; // tolerance on R2 itself
    const QuadratureResult q = integrate2d(integrand, cells, scaled);
    if (!q.converged)
        throw QuadratureError("2-D quadrature did not reach tolerance in budget");
    const double v = floor_roundoff(q.value / (area * area));
    check_variance_range(v);
    return {v, q.error / (area * area)};
}

inline ValueWithError r2_2d(const ExtremalModel& model, const Region& region,
                            double lambda, double u, const Quadrature2DOptions& opts) {
    region.validate();
    if (!(lambda > 0.0)) throw ParameterError("r2_variance_2d: lambda must be > 0");
    if (!(u > 0.0)) throw ParameterError("r2_variance_2d: u must be > 0");
    const double area = region_area(region, lambda);
    const double diam = max_pair_distance(region, lambda);
    auto cov = [&](Vec2 z) { return set_covariance(region, lambda, z); };
    return r2_lag_integral(model, u, area, diam, Vec2{0.0, 0.0}, cov, opts);
}

inline ValueWithError r2_2d(const ExtremalModel& model, const ConvexPolygon& poly,
                            double u, const Quadrature2DOptions& opts) {
    if (poly.vertices.size() < 3)
        throw ParameterError("r2_variance_2d: polygon needs at least 3 vertices");
    if (!(u > 0.0)) throw ParameterError("r2_variance_2d: u must be > 0");
    const double area = std::fabs(poly.area());
    const double diam = poly.max_pair_distance();
    auto cov = [&](Vec2 z) { return set_covariance(poly, z); };
    return r2_lag_integral(model, u, area, diam, Vec2{0.0, 0.0}, cov, opts);
}

} // namespace risk_detail

/// Variance of the normalized loss over lambda*A through the Corollary-1
/// one-dimensional reduction (isotropic Theta, disk or square region).
inline double r2_variance_1d(const ExtremalModel& model, const Region& region,
                             double lambda, double u,
                             const QuadratureOptions& opts = {}) {
    return risk_detail::r2_1d(model, region, lambda, u, opts).value;
}

/// Variance through the general double-region integral (Theorem 2),
/// reduced exactly to a lag integral against the region's set covariance.
/// Supports anisotropic Smith.
inline double r2_variance_2d(const ExtremalModel& model, const Region& region,
                             double lambda, double u,
                             const Quadrature2DOptions& opts = {}) {
    return risk_detail::r2_2d(model, region, lambda, u, opts).value;
}

/// Same, over an arbitrary convex polygon (already at its final scale).
inline double r2_variance_2d(const ExtremalModel& model, const ConvexPolygon& polygon,
                             double u, const Quadrature2DOptions& opts = {}) {
    return risk_detail::r2_2d(model, polygon, u, opts).value;
}

/// lim_{lambda->inf} R2(lambda A) = -exp(-2/u) + exp(-Theta(inf)/u).
/// Exactly zero for models with asymptotic independence.
inline double limiting_risk_measure(const ExtremalModel& model, double u) {
    if (!(u > 0.0)) throw ParameterError("limiting_risk_measure: u must be > 0");
    const double tl = theta_limit(model);
    if (tl == 2.0) return 0.0;
    return std::exp(-tl / u) - std::exp(-2.0 / u);
}

namespace risk_detail {

/// Power-variogram view of the Gaussian-tail models: Theta(h) =
/// 2 Phi(sqrt(eta h^a / 2)). Smith with Sigma = s*I is the a = 2,
/// eta = 1/(2s) case.
struct GaussianTailParams {
    double eta;
    double a;
};

inline std::optional<GaussianTailParams> gaussian_tail_params(const ExtremalModel& model) {
    if (const auto* s = model.as<SmithModel>()) {
        if (!s->sigma.proportional_to_identity())
            return GaussianTailParams{1.0 / (2.0 * s->sigma.max_eigenvalue()), 2.0};
        return GaussianTailParams{1.0 / (2.0 * s->sigma.a11), 2.0};
    }
    if (const auto* br = model.as<BrownResnickModel>())
        return GaussianTailParams{br->vario.eta, br->vario.a};
    return std::nullopt;
}

/// Upper bound on 2 pi / u * int_H^inf h (2 - Theta(h)) dh via Mill's
/// ratio, for Theta(h) = 2 Phi(sqrt(eta h^a / 2)).
inline double gaussian_tail_bound(const GaussianTailParams& p, double u, double H) {
    // 2 - Theta(h) = 2 PhiBar(psi), psi = sqrt(eta/2) h^{a/2};
    // PhiBar(psi) <= phi(psi)/psi, and the remaining integral is an upper
    // incomplete gamma after t = (eta/4) h^a.
    const double kappa = p.eta / 4.0;
    const double s = 2.0 / p.a - 0.5;
    const double x = kappa * std::pow(H, p.a);
    if (x > 700.0) return 0.0;
    const double front = (4.0 * M_PI / u) / std::sqrt(2.0 * M_PI) /
                         std::sqrt(p.eta / 2.0) / p.a *
                         std::pow(kappa, -s);
    return front * upper_gamma(s, x);
}

} // namespace risk_detail

/// sigma^2 = 2 pi int_0^inf h [exp(-Theta(h)/u) - exp(-2/u)] dh for models
/// with integrable 2 - Theta (Smith, Brown-Resnick power variogram, tube).
/// The tube integrates exactly on [0, 2 R_b]; the Gaussian-tail models use
/// a doubling cutoff with tail contribution below 1e-12. Theta == 2 yields
/// the degenerate value 0.
inline double sigma_squared(const ExtremalModel& model, double u) {
    if (!(u > 0.0)) throw ParameterError("sigma_squared: u must be > 0");
    const double e2 = std::exp(-2.0 / u);
    auto radial = [&](double h) {
        return h * (std::exp(-extremal_coefficient(model, h) / u) - e2);
    };
    QuadratureOptions opts;
    opts.abs_tol = 1e-13;
    opts.max_panels = 50000;

    if (const auto* tube = model.as<TubeModel>()) {
        const QuadratureResult q =
            integrate_or_throw(radial, 0.0, 2.0 * tube->r_b, opts);
        return 2.0 * M_PI * q.value;
    }
    if (const auto* c = model.as<ConstantThetaModel>()) {
        if (c->theta == 2.0) return 0.0; // degenerate: independence everywhere
        throw DivergenceError("sigma_squared diverges: Theta(inf) = " +
                              std::to_string(c->theta) + " < 2");
    }
    const auto params = risk_detail::gaussian_tail_params(model);
    if (!params) {
        throw DivergenceError(
            "sigma_squared is undefined for " + model.name() +
            ": Theta(inf) < 2, the integrand does not vanish at infinity");
    }
    double H = 2.0 * std::pow(4.0 / params->eta, 1.0 / params->a);
    int doublings = 0;
    while (risk_detail::gaussian_tail_bound(*params, u, H) > 1e-12) {
        H *= 2.0;
        if (++doublings > 60)
            throw DivergenceError("sigma_squared: radial cutoff search failed");
    }
    const QuadratureResult q = integrate_or_throw(radial, 0.0, H, opts);
    return 2.0 * M_PI * q.value;
}

/// Theorem-3 constants for the variance: order -2, K1 = 0, K2 = sigma^2/|A|.
inline HomogeneityConstants homogeneity_constants_variance(const ExtremalModel& model,
                                                           const Region& region,
                                                           double u) {
    const double s2 = sigma_squared(model, u);
    return {0.0, s2 / region_area(region), -2.0};
}

/// Theorem-5 constants for the VaR: order -1, K1 = 1 - exp(-1/u),
/// K2 = sigma q_alpha / sqrt(|A|). alpha = 0.5 is rejected (q = 0 breaks
/// the order).
inline HomogeneityConstants homogeneity_constants_var(const ExtremalModel& model,
                                                      const Region& region,
                                                      double u, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("homogeneity_constants_var: alpha must lie in (0,1)");
    if (alpha == 0.5)
        throw ParameterError("homogeneity_constants_var: alpha = 0.5 has q_alpha = 0");
    const double s = std::sqrt(sigma_squared(model, u));
    const double q = norm_quantile(alpha);
    return {r1_expectation(u), s * q / std::sqrt(region_area(region)), -1.0};
}

/// Gaussian (CLT) approximation of the VaR at finite lambda:
/// m + sigma q_alpha / (lambda sqrt(|A|)). alpha = 0.5 reduces to m.
inline double clt_gaussian_approx(const ExtremalModel& model, const Region& region,
                                  double lambda, double u, double alpha) {
    if (!(lambda > 0.0)) throw ParameterError("clt_gaussian_approx: lambda must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("clt_gaussian_approx: alpha must lie in (0,1)");
    const double m = r1_expectation(u);
    if (alpha == 0.5) return m;
    const double s = std::sqrt(sigma_squared(model, u));
    return m + s * norm_quantile(alpha) / (lambda * std::sqrt(region_area(region)));
}

/// GEV(mu, sigma, xi) threshold mapped to the standard Frechet scale.
/// The xi = 0 branch is taken for |xi| < 1e-12.
inline double gev_to_frechet_threshold(const GevParams& params, double u1) {
    params.validate();
    const double t = (u1 - params.mu) / params.sigma;
    if (std::fabs(params.xi) < 1e-12) return std::exp(t);
    const double bracket = 1.0 + params.xi * t;
    if (!(bracket > 0.0))
        throw ParameterError("gev_to_frechet_threshold: 1 + xi (u1-mu)/sigma must be > 0");
    return std::pow(bracket, 1.0 / params.xi);
}

/// Evaluate the query over an ascending lambda grid. Expectation and
/// variance queries run on the quadrature paths (1-D when the model is
/// isotropic and the region a disk/square, else 2-D); finite-lambda VaR
/// has no quadrature formula and lives in the simulation engine.
inline RiskCurve risk_curve(const RiskQuery& query, const std::vector<double>& lambdas,
                            const QuadratureOptions& opts1d = {},
                            const Quadrature2DOptions& opts2d = {}) {
    query.validate();
    if (lambdas.empty()) throw ParameterError("risk_curve: empty lambda grid");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw ParameterError("risk_curve: lambdas must be > 0");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
            throw ParameterError("risk_curve: lambda grid must ascend");
    }

    RiskCurve curve;
    curve.lambdas = lambdas;
    curve.values.resize(lambdas.size());
    curve.err.resize(lambdas.size());

    switch (query.kind) {
    case RiskKind::Expectation: {
        const double v = r1_expectation(query.u);
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            curve.values[i] = v;
            curve.err[i] = 0.0;
        }
        curve.limit = v;
        curve.provenance = Provenance::Quadrature1D;
        return curve;
    }
    case RiskKind::Variance: {
        const bool use_1d = has_isotropic_theta(query.model);
        curve.provenance = use_1d ? Provenance::Quadrature1D : Provenance::Quadrature2D;
        parallel_for(lambdas.size(), [&](std::size_t i) {
            const risk_detail::ValueWithError r =
                use_1d ? risk_detail::r2_1d(query.model, query.region, lambdas[i],
                                            query.u, opts1d)
                       : risk_detail::r2_2d(query.model, query.region, lambdas[i],
                                            query.u, opts2d);
            curve.values[i] = r.value;
            curve.err[i] = r.error;
        });
        curve.limit = limiting_risk_measure(query.model, query.u);
        return curve;
    }
    case RiskKind::VaR:
        throw ParameterError(
            "risk_curve: finite-lambda VaR has no quadrature formula; "
            "use the Monte-Carlo engine (simulation::var_curve)");
    }
    throw ParameterError("risk_curve: unknown risk kind");
}

} // namespace spatrisk
