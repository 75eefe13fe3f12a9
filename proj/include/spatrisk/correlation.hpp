#pragma once

#include <cmath>

#include "spatrisk/error.hpp"
#include "spatrisk/special.hpp"

namespace spatrisk {

enum class CorrelationKind { WhittleMatern, Cauchy, PoweredExponential };

/// Isotropic correlation family with range c1 and smoothing c2.
struct CorrelationFamily {
    CorrelationKind kind = CorrelationKind::PoweredExponential;
    double c1 = 1.0;
    double c2 = 1.0;

    void validate() const {
        if (!(c1 > 0.0)) throw ParameterError("correlation: range c1 must be > 0");
        switch (kind) {
        case CorrelationKind::PoweredExponential:
            if (!(c2 > 0.0 && c2 < 2.0))
                throw ParameterError("powered exponential: need 0 < c2 < 2");
            break;
        case CorrelationKind::WhittleMatern:
        case CorrelationKind::Cauchy:
            if (!(c2 > 0.0)) throw ParameterError("correlation: c2 must be > 0");
            break;
        }
    }
};

/// rho(h) for the family. rho(0) = 1; the Whittle-Matern h -> 0 limit is
/// taken analytically.
inline double correlation(const CorrelationFamily& family, double h) {
    family.validate();
    if (!(h >= 0.0)) throw ParameterError("correlation: h must be >= 0");
    if (h == 0.0) return 1.0;
    const double t = h / family.c1;
    switch (family.kind) {
    case CorrelationKind::Cauchy:
        return std::pow(1.0 + t * t, -family.c2);
    case CorrelationKind::PoweredExponential:
        return std::exp(-std::pow(t, family.c2));
    case CorrelationKind::WhittleMatern: {
        const double nu = family.c2;
        const double k = bessel_k(nu, t);
        if (k == 0.0) return 0.0; // underflow deep in the tail
        const double v = std::pow(2.0, 1.0 - nu) / std::tgamma(nu) *
                         std::pow(t, nu) * k;
        return v > 1.0 ? 1.0 : v; // roundoff at tiny t
    }
    }
    return 1.0;
}

} // namespace spatrisk
