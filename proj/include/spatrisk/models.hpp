#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "spatrisk/correlation.hpp"
#include "spatrisk/error.hpp"
#include "spatrisk/geometry.hpp"
#include "spatrisk/special.hpp"

// The max-stable dependence models: each exposes its extremal coefficient
// function Theta(h) (and the anisotropic pairwise form for Smith), plus the
// tube process's bivariate distribution function.

namespace spatrisk {

/// Symmetric 2x2 matrix (Smith covariance).
struct Matrix2Sym {
    double a11 = 1.0;
    double a12 = 0.0;
    double a22 = 1.0;

    static Matrix2Sym identity() { return {1.0, 0.0, 1.0}; }

    double det() const { return a11 * a22 - a12 * a12; }

    void validate_spd() const {
        if (!(a11 > 0.0) || !(det() > 0.0))
            throw ParameterError("Smith covariance must be symmetric positive-definite");
    }

    /// z' * inverse(this) * z
    double inv_quadform(Vec2 z) const {
        const double d = det();
        return (a22 * z.x * z.x - 2.0 * a12 * z.x * z.y + a11 * z.y * z.y) / d;
    }

    double max_eigenvalue() const {
        const double tr = a11 + a22;
        const double gap = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
        return 0.5 * (tr + gap);
    }

    bool proportional_to_identity() const { return a12 == 0.0 && a11 == a22; }
};

/// Power semivariogram gamma(h) = eta * h^a, a in (0, 2].
struct Semivariogram {
    double eta = 1.0;
    double a = 1.0;

    void validate() const {
        if (!(eta > 0.0)) throw ParameterError("semivariogram: eta must be > 0");
        if (!(a > 0.0 && a <= 2.0)) throw ParameterError("semivariogram: a must lie in (0,2]");
    }

    double operator()(double h) const { return eta * std::pow(h, a); }
};

struct SmithModel {
    Matrix2Sym sigma = Matrix2Sym::identity();
};

struct SchlatherModel {
    CorrelationFamily corr;
};

struct GeometricGaussianModel {
    double sigma_eps = 1.0;
    CorrelationFamily corr;
};

struct BrownResnickModel {
    Semivariogram vario;
};

struct TubeModel {
    double r_b = 1.0;
    double h_b() const { return 1.0 / (M_PI * r_b * r_b); }
};

/// Degenerate analytic fixture with constant Theta(h) = theta for h > 0.
struct ConstantThetaModel {
    double theta = 1.0;
};

class ExtremalModel {
public:
    using Variant = std::variant<SmithModel, SchlatherModel, GeometricGaussianModel,
                                 BrownResnickModel, TubeModel, ConstantThetaModel>;

    ExtremalModel(SmithModel m) : value_(m) { m.sigma.validate_spd(); }
    ExtremalModel(SchlatherModel m) : value_(m) { m.corr.validate(); }
    ExtremalModel(GeometricGaussianModel m) : value_(m) {
        m.corr.validate();
        if (!(m.sigma_eps > 0.0))
            throw ParameterError("geometric Gaussian: sigma_eps must be > 0");
    }
    ExtremalModel(BrownResnickModel m) : value_(m) { m.vario.validate(); }
    ExtremalModel(TubeModel m) : value_(m) {
        if (!(m.r_b > 0.0)) throw ParameterError("tube: R_b must be > 0");
    }
    ExtremalModel(ConstantThetaModel m) : value_(m) {
        if (!(m.theta >= 1.0 && m.theta <= 2.0))
            throw ParameterError("constant-theta fixture: theta must lie in [1,2]");
    }

    const Variant& value() const { return value_; }

    template <class T>
    const T* as() const { return std::get_if<T>(&value_); }

    template <class T>
    bool is() const { return std::holds_alternative<T>(value_); }

    std::string name() const {
        struct V {
            std::string operator()(const SmithModel&) const { return "smith"; }
            std::string operator()(const SchlatherModel&) const { return "schlather"; }
            std::string operator()(const GeometricGaussianModel&) const { return "geomgauss"; }
            std::string operator()(const BrownResnickModel&) const { return "brownresnick"; }
            std::string operator()(const TubeModel&) const { return "tube"; }
            std::string operator()(const ConstantThetaModel&) const { return "constant-theta"; }
        };
        return std::visit(V{}, value_);
    }

private:
    Variant value_;
};

/// True when Theta(x1, x2) depends on |x1 - x2| only. Smith qualifies iff
/// its covariance is proportional to the identity.
inline bool has_isotropic_theta(const ExtremalModel& model) {
    if (const auto* s = model.as<SmithModel>())
        return s->sigma.proportional_to_identity();
    return true;
}

namespace model_detail {

inline double check_theta_band(double theta) {
    if (theta < 1.0 - 1e-12 || theta > 2.0 + 1e-12)
        throw ConsistencyError("extremal coefficient outside [1,2]: " + std::to_string(theta));
    return theta;
}

inline double theta_tube(const TubeModel& tube, double h) {
    if (h >= 2.0 * tube.r_b) return 2.0;
    return 2.0 - tube.h_b() * disc_intersection_area(h, tube.r_b);
}

} // namespace model_detail

/// Isotropic extremal coefficient Theta(h). Values are verified to lie in
/// [1,2] up to 1e-12 and never clipped; violations throw ConsistencyError.
inline double extremal_coefficient(const ExtremalModel& model, double h) {
    if (!(h >= 0.0)) throw ParameterError("extremal_coefficient: h must be >= 0");
    struct V {
        double h;
        double operator()(const SmithModel& m) const {
            if (!m.sigma.proportional_to_identity())
                throw ParameterError(
                    "Smith Theta(h) is isotropic only for Sigma proportional to identity; "
                    "use pairwise_extremal_coefficient");
            return 2.0 * norm_cdf(h / (2.0 * std::sqrt(m.sigma.a11)));
        }
        double operator()(const SchlatherModel& m) const {
            return 1.0 + std::sqrt(0.5 * (1.0 - correlation(m.corr, h)));
        }
        double operator()(const GeometricGaussianModel& m) const {
            const double g = m.sigma_eps * m.sigma_eps * (1.0 - correlation(m.corr, h));
            return 2.0 * norm_cdf(std::sqrt(0.5 * g));
        }
        double operator()(const BrownResnickModel& m) const {
            return 2.0 * norm_cdf(std::sqrt(0.5 * m.vario(h)));
        }
        double operator()(const TubeModel& m) const { return model_detail::theta_tube(m, h); }
        double operator()(const ConstantThetaModel& m) const {
            return h == 0.0 ? 1.0 : m.theta;
        }
    };
    return model_detail::check_theta_band(std::visit(V{h}, model.value()));
}

/// Pairwise extremal coefficient; honors Smith anisotropy, all other
/// models delegate to the isotropic form at the pair distance.
inline double pairwise_extremal_coefficient(const ExtremalModel& model, Vec2 x1, Vec2 x2) {
    if (const auto* s = model.as<SmithModel>()) {
        const double q = s->sigma.inv_quadform(x1 - x2);
        return model_detail::check_theta_band(2.0 * norm_cdf(0.5 * std::sqrt(q)));
    }
    return extremal_coefficient(model, norm(x1 - x2));
}

/// Theta at a lag vector (stationarity makes Theta a function of x1-x2).
inline double extremal_coefficient_lag(const ExtremalModel& model, Vec2 z) {
    return pairwise_extremal_coefficient(model, z, Vec2{0.0, 0.0});
}

/// lim_{h->inf} Theta(h). Exists for every shipped configuration: the
/// Table-1 correlation families all vanish at infinity.
inline double theta_limit(const ExtremalModel& model) {
    struct V {
        double operator()(const SmithModel&) const { return 2.0; }
        double operator()(const SchlatherModel&) const { return 1.0 + std::sqrt(0.5); }
        double operator()(const GeometricGaussianModel& m) const {
            return 2.0 * norm_cdf(m.sigma_eps * M_SQRT1_2);
        }
        double operator()(const BrownResnickModel&) const { return 2.0; }
        double operator()(const TubeModel&) const { return 2.0; }
        double operator()(const ConstantThetaModel& m) const { return m.theta; }
    };
    return std::visit(V{}, model.value());
}

/// Mixing diagnostic r(h) = 2 - Theta(h).
inline double dependence_summary(const ExtremalModel& model, double h) {
    return 2.0 - extremal_coefficient(model, h);
}

/// P(Z(x1) <= z1, Z(x2) <= z2) for the tube process at pair distance h.
inline double tube_bivariate_cdf(double r_b, double h, double z1, double z2) {
    if (!(r_b > 0.0)) throw ParameterError("tube_bivariate_cdf: R_b must be > 0");
    if (!(h >= 0.0)) throw ParameterError("tube_bivariate_cdf: h must be >= 0");
    if (!(z1 > 0.0 && z2 > 0.0))
        throw ParameterError("tube_bivariate_cdf: levels must be > 0");
    const double h_b = 1.0 / (M_PI * r_b * r_b);
    const double partial = h_b * (M_PI * r_b * r_b - disc_intersection_area(h, r_b));
    const double exponent = (z2 <= z1) ? partial / z1 + 1.0 / z2
                                       : 1.0 / z1 + partial / z2;
    return std::exp(-exponent);
}

} // namespace spatrisk
