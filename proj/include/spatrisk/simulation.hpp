#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "spatrisk/error.hpp"
#include "spatrisk/geometry.hpp"
#include "spatrisk/models.hpp"
#include "spatrisk/parallel.hpp"
#include "spatrisk/risk.hpp"
#include "spatrisk/rng.hpp"
#include "spatrisk/special.hpp"

// Monte-Carlo engine: max-stable field simulation on raster grids over
// lambda*A, Riemann-sum losses, empirical variance and empirical VaR.
// Storm-based models (tube, Smith) run the moving-maxima construction with
// the standard decreasing-intensity stopping rule; Gaussian-based models
// run the spectral construction with an envelope-truncated stopping rule
// whose bias is reported, not hidden.

namespace spatrisk {

/// Regular lattice over lambda*A at pitch 1/m_per_unit, cell centers.
/// A unit square at m_per_unit = 7 carries M = 49 sites and lambda*A
/// carries lambda^2 M.
struct GridSpec {
    Region region;
    double lambda = 1.0;
    int m_per_unit = 7;

    void validate() const {
        region.validate();
        if (!(lambda > 0.0)) throw ParameterError("GridSpec: lambda must be > 0");
        if (m_per_unit < 1) throw ParameterError("GridSpec: m_per_unit must be >= 1");
    }

    struct Lattice {
        int nx = 0, ny = 0;
        double x0 = 0.0, y0 = 0.0;
        double pitch = 0.0;
    };

    Lattice lattice() const {
        validate();
        const double s = lambda * region.r;
        const double extent = region.shape == Shape::Disk ? 2.0 * s : s;
        const int n = std::max<int>(1, std::llround(extent * m_per_unit));
        Lattice l;
        l.nx = l.ny = n;
        l.pitch = extent / n;
        l.x0 = region.center.x - 0.5 * extent;
        l.y0 = region.center.y - 0.5 * extent;
        return l;
    }

    /// Sites inside lambda*A, row-major over the lattice.
    std::vector<Vec2> sites() const {
        const Lattice l = lattice();
        std::vector<Vec2> out;
        out.reserve(static_cast<std::size_t>(l.nx) * l.ny);
        const double s = lambda * region.r;
        for (int iy = 0; iy < l.ny; ++iy) {
            for (int ix = 0; ix < l.nx; ++ix) {
                const Vec2 p{l.x0 + (ix + 0.5) * l.pitch, l.y0 + (iy + 0.5) * l.pitch};
                if (region.shape == Shape::Disk && norm(p - region.center) > s) continue;
                out.push_back(p);
            }
        }
        return out;
    }
};

enum class TruncationKind { Exact, Truncated };

/// `bound` is the coefficient b of the documented per-site bias bound
/// |P_sim(Z <= z) - P(Z <= z)| <= b / z (0 for exact paths). When a storm
/// budget is exhausted it instead records the field level below which
/// values are unreliable.
struct TruncationReport {
    TruncationKind kind = TruncationKind::Exact;
    double bound = 0.0;
};

struct FieldSample {
    GridSpec grid;
    std::vector<Vec2> sites;
    std::vector<double> values;
    std::uint64_t seed = 0;
    TruncationReport truncation;
};

struct LossSample {
    double l_n = 0.0;
    double u = 1.0;
    std::uint64_t seed = 0;
};

struct SimulationOptions {
    double envelope_quantile = 4.0; // Gaussian envelope quantile c
    std::size_t max_storms = 500000;
    bool strict = false;            // escalate budget exhaustion to an error
};

namespace sim_detail {

struct BBox {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

inline BBox site_bbox(const std::vector<Vec2>& sites) {
    BBox b{sites[0].x, sites[0].y, sites[0].x, sites[0].y};
    for (const Vec2& p : sites) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x);
        b.y1 = std::max(b.y1, p.y);
    }
    return b;
}

struct TubeShape {
    double r_b, h_b;
    explicit TubeShape(const TubeModel& m) : r_b(m.r_b), h_b(m.h_b()) {}
    double f_max() const { return h_b; }
    double margin() const { return 2.0 * r_b; } // exact: shape support is r_b
    double operator()(Vec2 dz) const {
        return (dz.x * dz.x + dz.y * dz.y < r_b * r_b) ? h_b : 0.0;
    }
    // exact simulation: finite-support shape + stopping rule
    TruncationReport report() const { return {TruncationKind::Exact, 0.0}; }
};

struct SmithShape {
    Matrix2Sym sigma;
    double c;
    explicit SmithShape(const SmithModel& m)
        : sigma(m.sigma), c(1.0 / (2.0 * M_PI * std::sqrt(m.sigma.det()))) {}
    double f_max() const { return c; }
    double margin() const { return 6.0 * std::sqrt(sigma.max_eigenvalue()); }
    double operator()(Vec2 dz) const {
        const double q = sigma.inv_quadform(dz);
        return q > 160.0 ? 0.0 : c * std::exp(-0.5 * q);
    }
    // storms beyond the 6-sigma margin carry Gaussian mass exp(-18)
    TruncationReport report() const { return {TruncationKind::Truncated, std::exp(-18.0)}; }
};

template <class ShapeFn>
TruncationReport m2_field(const ShapeFn& shape, const std::vector<Vec2>& sites,
                          std::vector<double>& values, Rng& rng,
                          const SimulationOptions& opts) {
    const BBox bb = site_bbox(sites);
    const double m = shape.margin();
    const double w = (bb.x1 - bb.x0) + 2.0 * m;
    const double h = (bb.y1 - bb.y0) + 2.0 * m;
    const double area = w * h;
    const double fmax = shape.f_max();

    values.assign(sites.size(), 0.0);
    double zmin = 0.0;
    double gamma = 0.0;
    TruncationReport report = shape.report();
    for (std::size_t storms = 0;; ++storms) {
        gamma += rng.exponential();
        const double intensity = area / gamma;
        if (intensity * fmax <= zmin) break;
        if (storms >= opts.max_storms) {
            if (opts.strict)
                throw SimulationError("storm budget exceeded in strict mode");
            report.kind = TruncationKind::Truncated;
            report.bound = std::max(report.bound, intensity * fmax);
            break;
        }
        const Vec2 center{bb.x0 - m + rng.uniform() * w, bb.y0 - m + rng.uniform() * h};
        double newmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sites.size(); ++i) {
            const double v = intensity * shape(sites[i] - center);
            if (v > values[i]) values[i] = v;
            if (values[i] < newmin) newmin = values[i];
        }
        zmin = newmin;
    }
    return report;
}

/// Dense row-major Cholesky with a diagonal jitter retry; throws on
/// matrices that stay non-positive-definite.
inline std::vector<double> cholesky(std::vector<double> a, std::size_t n) {
    const std::vector<double> base = a;
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double sum = base[i * n + j] + ((i == j) ? jitter : 0.0);
                for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
                if (i == j) {
                    if (sum <= 0.0) {
                        ok = false;
                        break;
                    }
                    a[i * n + j] = std::sqrt(sum);
                } else {
                    a[i * n + j] = sum / a[j * n + j];
                }
            }
        }
        if (ok) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
            return a;
        }
        a = base;
        jitter = (jitter == 0.0) ? 1e-12 : jitter * 100.0;
    }
    throw ParameterError("covariance matrix is not positive definite");
}

enum class SpectralKind { Schlather, GeometricGaussian, BrownResnick };

struct SpectralConfig {
    SpectralKind kind;
    std::size_t n = 0;
    std::vector<double> chol;     // lower factor of the Gaussian covariance
    std::vector<double> gamma_at; // BR only: semivariogram to the grid origin
    double sigma_eps = 1.0;       // geometric Gaussian only
    double envelope = 1.0;        // spectral envelope constant
    double bias_coefficient = 0.0;
};

inline SpectralConfig make_spectral_config(const ExtremalModel& model,
                                           const std::vector<Vec2>& sites,
                                           const SimulationOptions& opts) {
    SpectralConfig cfg{};
    cfg.n = sites.size();
    const double c = opts.envelope_quantile;
    std::vector<double> cov(cfg.n * cfg.n, 0.0);

    if (const auto* schl = model.as<SchlatherModel>()) {
        cfg.kind = SpectralKind::Schlather;
        for (std::size_t i = 0; i < cfg.n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                cov[i * cfg.n + j] = cov[j * cfg.n + i] =
                    correlation(schl->corr, norm(sites[i] - sites[j]));
        cfg.envelope = std::sqrt(2.0 * M_PI) * c;
        cfg.bias_coefficient = std::sqrt(2.0 * M_PI) * (norm_pdf(c) - c * norm_sf(c));
    } else if (const auto* gg = model.as<GeometricGaussianModel>()) {
        cfg.kind = SpectralKind::GeometricGaussian;
        cfg.sigma_eps = gg->sigma_eps;
        for (std::size_t i = 0; i < cfg.n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                cov[i * cfg.n + j] = cov[j * cfg.n + i] =
                    correlation(gg->corr, norm(sites[i] - sites[j]));
        const double s = gg->sigma_eps;
        cfg.envelope = std::exp(s * c - 0.5 * s * s);
        cfg.bias_coefficient = norm_sf(c - s) - cfg.envelope * norm_sf(c);
    } else if (const auto* br = model.as<BrownResnickModel>()) {
        cfg.kind = SpectralKind::BrownResnick;
        Vec2 origin{0.0, 0.0};
        for (const Vec2& p : sites) origin = origin + p;
        origin = (1.0 / static_cast<double>(cfg.n)) * origin;
        cfg.gamma_at.resize(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i)
            cfg.gamma_at[i] = br->vario(norm(sites[i] - origin));
        for (std::size_t i = 0; i < cfg.n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                cov[i * cfg.n + j] = cov[j * cfg.n + i] =
                    cfg.gamma_at[i] + cfg.gamma_at[j] -
                    br->vario(norm(sites[i] - sites[j]));
        cfg.envelope = 0.0;
        cfg.bias_coefficient = 0.0;
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const double sw = std::sqrt(2.0 * cfg.gamma_at[i]);
            cfg.envelope = std::max(cfg.envelope, std::exp(sw * c - cfg.gamma_at[i]));
        }
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const double sw = std::sqrt(2.0 * cfg.gamma_at[i]);
            if (sw < 1e-8) continue; // site at the origin: V == 1, bounded
            const double t = (std::log(cfg.envelope) + 0.5 * sw * sw) / sw;
            cfg.bias_coefficient = std::max(
                cfg.bias_coefficient, norm_sf(t - sw) - cfg.envelope * norm_sf(t));
        }
    } else {
        throw ParameterError("spectral simulation: unsupported model " + model.name());
    }
    cfg.chol = cholesky(std::move(cov), cfg.n);
    return cfg;
}

inline TruncationReport spectral_field(const SpectralConfig& cfg,
                                       std::vector<double>& values, Rng& rng,
                                       const SimulationOptions& opts) {
    const std::size_t n = cfg.n;
    values.assign(n, 0.0);
    std::vector<double> g(n), eps(n);
    double zmin = 0.0;
    double gamma = 0.0;
    TruncationReport report{TruncationKind::Truncated, cfg.bias_coefficient};
    for (std::size_t storms = 0;; ++storms) {
        gamma += rng.exponential();
        const double intensity = 1.0 / gamma;
        if (intensity * cfg.envelope <= zmin) break;
        if (storms >= opts.max_storms) {
            if (opts.strict)
                throw SimulationError("storm budget exceeded in strict mode");
            report.bound = std::max(report.bound, intensity * cfg.envelope);
            break;
        }
        for (std::size_t i = 0; i < n; ++i) g[i] = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) s += cfg.chol[i * n + k] * g[k];
            eps[i] = s;
        }
        double newmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            switch (cfg.kind) {
            case SpectralKind::Schlather:
                v = eps[i] > 0.0 ? std::sqrt(2.0 * M_PI) * eps[i] : 0.0;
                break;
            case SpectralKind::GeometricGaussian:
                v = std::exp(cfg.sigma_eps * eps[i] - 0.5 * cfg.sigma_eps * cfg.sigma_eps);
                break;
            case SpectralKind::BrownResnick:
                v = std::exp(eps[i] - cfg.gamma_at[i]);
                break;
            }
            const double z = intensity * v;
            if (z > values[i]) values[i] = z;
            if (values[i] < newmin) newmin = values[i];
        }
        zmin = newmin;
    }
    return report;
}

} // namespace sim_detail

/// One realization of the max-stable field on the grid.
inline FieldSample simulate_field(const ExtremalModel& model, const GridSpec& grid,
                                  std::uint64_t seed,
                                  const SimulationOptions& opts = {}) {
    FieldSample out;
    out.grid = grid;
    out.sites = grid.sites();
    out.seed = seed;
    if (out.sites.empty()) throw ParameterError("simulate_field: empty grid");
    Rng rng = Rng::stream(seed, 0);

    if (const auto* tube = model.as<TubeModel>()) {
        out.truncation = sim_detail::m2_field(sim_detail::TubeShape(*tube), out.sites,
                                              out.values, rng, opts);
    } else if (const auto* smith = model.as<SmithModel>()) {
        out.truncation = sim_detail::m2_field(sim_detail::SmithShape(*smith), out.sites,
                                              out.values, rng, opts);
    } else if (const auto* cons = model.as<ConstantThetaModel>()) {
        // Degenerate fixtures: theta == 1 is the comonotone field, theta == 2
        // is sitewise independence. Intermediate constants have no process.
        if (cons->theta == 1.0) {
            out.values.assign(out.sites.size(), rng.frechet());
        } else if (cons->theta == 2.0) {
            out.values.resize(out.sites.size());
            for (double& v : out.values) v = rng.frechet();
        } else {
            throw ParameterError("no simulator for constant theta strictly inside (1,2)");
        }
        out.truncation = {TruncationKind::Exact, 0.0};
    } else {
        const sim_detail::SpectralConfig cfg =
            sim_detail::make_spectral_config(model, out.sites, opts);
        out.truncation = sim_detail::spectral_field(cfg, out.values, rng, opts);
    }
    return out;
}

/// Riemann-sum loss: fraction of grid sites exceeding u.
inline LossSample loss_sample(const FieldSample& field, double u) {
    if (!(u > 0.0)) throw ParameterError("loss_sample: u must be > 0");
    std::size_t count = 0;
    for (double v : field.values)
        if (v > u) ++count;
    return {static_cast<double>(count) / static_cast<double>(field.values.size()), u,
            field.seed};
}

namespace sim_detail {

/// Uniform-cell spatial index over the sites, for marking the sites hit by
/// one storm's exceedance disk.
class SiteBuckets {
public:
    SiteBuckets(const std::vector<Vec2>& sites, double cell) : sites_(sites) {
        bb_ = site_bbox(sites);
        cell_ = std::max(cell, 1e-9);
        nx_ = std::max<int>(1, static_cast<int>((bb_.x1 - bb_.x0) / cell_) + 1);
        ny_ = std::max<int>(1, static_cast<int>((bb_.y1 - bb_.y0) / cell_) + 1);
        std::vector<int> counts(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
        for (const Vec2& p : sites) ++counts[cell_of(p) + 1];
        for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
        start_ = counts;
        items_.resize(sites.size());
        std::vector<int> cursor(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < sites.size(); ++i)
            items_[cursor[cell_of(sites[i])]++] = static_cast<int>(i);
    }

    template <class Fn>
    void for_disc(Vec2 center, double radius, Fn&& fn) const {
        const int ix0 = clampx(static_cast<int>(std::floor((center.x - radius - bb_.x0) / cell_)));
        const int ix1 = clampx(static_cast<int>(std::floor((center.x + radius - bb_.x0) / cell_)));
        const int iy0 = clampy(static_cast<int>(std::floor((center.y - radius - bb_.y0) / cell_)));
        const int iy1 = clampy(static_cast<int>(std::floor((center.y + radius - bb_.y0) / cell_)));
        for (int iy = iy0; iy <= iy1; ++iy) {
            for (int ix = ix0; ix <= ix1; ++ix) {
                const std::size_t c = static_cast<std::size_t>(iy) * nx_ + ix;
                for (int k = start_[c]; k < start_[c + 1]; ++k) fn(items_[k]);
            }
        }
    }

    const std::vector<Vec2>& sites() const { return sites_; }
    const BBox& bbox() const { return bb_; }

private:
    int cell_of(Vec2 p) const {
        const int ix = clampx(static_cast<int>((p.x - bb_.x0) / cell_));
        const int iy = clampy(static_cast<int>((p.y - bb_.y0) / cell_));
        return iy * nx_ + ix;
    }
    int clampx(int i) const { return std::clamp(i, 0, nx_ - 1); }
    int clampy(int i) const { return std::clamp(i, 0, ny_ - 1); }

    std::vector<Vec2> sites_;
    BBox bb_;
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<int> start_;
    std::vector<int> items_;
};

/// Exceedance-only storm sampler for the moving-maxima models: only storms
/// with U f_max > u can push a site above u, so the excursion set is the
/// union of the storms' exceedance regions. Pathwise equal to thresholding
/// a full field; exact for the tube, 6-sigma-margin truncated for Smith.
struct ThresholdLossSampler {
    const SiteBuckets& buckets;
    bool is_tube;
    double r_b = 1.0;            // tube
    Matrix2Sym sigma;            // smith
    double eigmax = 1.0;
    double tau = 1.0;            // minimal relevant storm intensity
    double margin = 0.0;
    double bx0 = 0.0, by0 = 0.0, w = 0.0, h = 0.0, area = 0.0;

    ThresholdLossSampler(const SiteBuckets& b, const ExtremalModel& model, double u)
        : buckets(b) {
        const BBox& bb = b.bbox();
        if (const auto* tube = model.as<TubeModel>()) {
            is_tube = true;
            r_b = tube->r_b;
            tau = u / tube->h_b();
            margin = 2.0 * r_b;
        } else if (const auto* smith = model.as<SmithModel>()) {
            is_tube = false;
            sigma = smith->sigma;
            eigmax = sigma.max_eigenvalue();
            tau = u * 2.0 * M_PI * std::sqrt(sigma.det());
            margin = 6.0 * std::sqrt(eigmax);
        } else {
            throw ParameterError("threshold loss sampler needs a tube or Smith model");
        }
        bx0 = bb.x0 - margin;
        by0 = bb.y0 - margin;
        w = (bb.x1 - bb.x0) + 2.0 * margin;
        h = (bb.y1 - bb.y0) + 2.0 * margin;
        area = w * h;
    }

    /// One replicate's loss; `epoch`/`tag` implement reset-free marking.
    double replicate(Rng& rng, std::vector<std::uint32_t>& epoch, std::uint32_t tag) const {
        const std::size_t n = buckets.sites().size();
        std::size_t count = 0;
        double gamma = 0.0;
        for (;;) {
            gamma += rng.exponential();
            const double intensity = area / gamma;
            if (intensity <= tau) break;
            const Vec2 center{bx0 + rng.uniform() * w, by0 + rng.uniform() * h};
            if (is_tube) {
                const double r2 = r_b * r_b;
                buckets.for_disc(center, r_b, [&](int i) {
                    const Vec2 d = buckets.sites()[i] - center;
                    if (d.x * d.x + d.y * d.y < r2 && epoch[i] != tag) {
                        epoch[i] = tag;
                        ++count;
                    }
                });
            } else {
                const double qstar = 2.0 * std::log(intensity / tau);
                const double rad = std::sqrt(qstar * eigmax);
                buckets.for_disc(center, rad, [&](int i) {
                    const Vec2 d = buckets.sites()[i] - center;
                    if (sigma.inv_quadform(d) < qstar && epoch[i] != tag) {
                        epoch[i] = tag;
                        ++count;
                    }
                });
            }
            if (count == n) break; // every site already exceeds
        }
        return static_cast<double>(count) / static_cast<double>(n);
    }
};

} // namespace sim_detail

/// S independent Riemann-sum losses; replicate i draws from (seed, i), so
/// results are reproducible and independent of the worker count.
inline std::vector<double> simulate_losses(const ExtremalModel& model, const GridSpec& grid,
                                           double u, std::size_t s, std::uint64_t seed,
                                           const SimulationOptions& opts = {}) {
    if (!(u > 0.0)) throw ParameterError("simulate_losses: u must be > 0");
    if (s == 0) throw ParameterError("simulate_losses: need at least one replicate");
    const std::vector<Vec2> sites = grid.sites();
    const std::size_t n = sites.size();
    std::vector<double> losses(s);

    if (model.is<TubeModel>() || model.is<SmithModel>()) {
        const double cell = model.is<TubeModel>()
                                ? model.as<TubeModel>()->r_b
                                : std::sqrt(model.as<SmithModel>()->sigma.max_eigenvalue());
        const sim_detail::SiteBuckets buckets(sites, cell);
        const sim_detail::ThresholdLossSampler sampler(buckets, model, u);
        parallel_chunks(s, [&](std::size_t lo, std::size_t hi) {
            std::vector<std::uint32_t> epoch(n, 0);
            for (std::size_t i = lo; i < hi; ++i) {
                Rng rng = Rng::stream(seed, i);
                losses[i] = sampler.replicate(rng, epoch, static_cast<std::uint32_t>(i - lo) + 1);
            }
        });
        return losses;
    }

    if (const auto* cons = model.as<ConstantThetaModel>()) {
        if (cons->theta != 1.0 && cons->theta != 2.0)
            throw ParameterError("no simulator for constant theta strictly inside (1,2)");
        parallel_for(s, [&](std::size_t i) {
            Rng rng = Rng::stream(seed, i);
            if (cons->theta == 1.0) {
                losses[i] = rng.frechet() > u ? 1.0 : 0.0;
            } else {
                std::size_t count = 0;
                for (std::size_t k = 0; k < n; ++k)
                    if (rng.frechet() > u) ++count;
                losses[i] = static_cast<double>(count) / static_cast<double>(n);
            }
        });
        return losses;
    }

    const sim_detail::SpectralConfig cfg = sim_detail::make_spectral_config(model, sites, opts);
    parallel_chunks(s, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> values;
        for (std::size_t i = lo; i < hi; ++i) {
            Rng rng = Rng::stream(seed, i);
            sim_detail::spectral_field(cfg, values, rng, opts);
            std::size_t count = 0;
            for (double v : values)
                if (v > u) ++count;
            losses[i] = static_cast<double>(count) / static_cast<double>(n);
        }
    });
    return losses;
}

struct LossMoments {
    double mean = 0.0;
    double variance = 0.0;
    double mean_stderr = 0.0;      // jackknife
    double variance_stderr = 0.0;  // jackknife
};

/// Sample mean/variance of S losses with delete-one jackknife errors.
inline LossMoments empirical_var(const ExtremalModel& model, const GridSpec& grid,
                                 double u, std::size_t s, std::uint64_t seed,
                                 const SimulationOptions& opts = {}) {
    if (s < 2) throw ParameterError("empirical_var: need at least 2 replicates");
    const std::vector<double> losses = simulate_losses(model, grid, u, s, seed, opts);
    const double S = static_cast<double>(s);
    double t1 = 0.0, t2 = 0.0;
    for (double x : losses) {
        t1 += x;
        t2 += x * x;
    }
    LossMoments out;
    out.mean = t1 / S;
    out.variance = (t2 - t1 * t1 / S) / (S - 1.0);

    double sm = 0.0, sm2 = 0.0, sv = 0.0, sv2 = 0.0;
    const bool have_var_jk = s >= 3;
    for (double x : losses) {
        const double mi = (t1 - x) / (S - 1.0);
        sm += mi;
        sm2 += mi * mi;
        if (have_var_jk) {
            const double vi = (t2 - x * x - (S - 1.0) * mi * mi) / (S - 2.0);
            sv += vi;
            sv2 += vi * vi;
        }
    }
    out.mean_stderr = std::sqrt(std::max(0.0, (S - 1.0) / S * (sm2 - sm * sm / S)));
    out.variance_stderr =
        have_var_jk ? std::sqrt(std::max(0.0, (S - 1.0) / S * (sv2 - sv * sv / S)))
                    : std::numeric_limits<double>::quiet_NaN();
    return out;
}

namespace sim_detail {

inline std::size_t quantile_index(double alpha, std::size_t s) {
    // ceil(alpha*S) as an order-statistic rank, robust to fp excess
    const double raw = std::ceil(alpha * static_cast<double>(s) - 1e-9);
    const std::size_t j = raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
    return std::min(j, s);
}

} // namespace sim_detail

/// Lower empirical quantile (order statistic ceil(alpha*S)) of S losses:
/// the Monte-Carlo VaR of the normalized loss.
inline double empirical_var_at_risk(const ExtremalModel& model, const GridSpec& grid,
                                    double u, double alpha, std::size_t s,
                                    std::uint64_t seed,
                                    const SimulationOptions& opts = {}) {
    if (s < 100) throw ParameterError("empirical_var_at_risk: need at least 100 replicates");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("empirical_var_at_risk: alpha must lie in (0,1)");
    std::vector<double> losses = simulate_losses(model, grid, u, s, seed, opts);
    std::sort(losses.begin(), losses.end());
    return losses[sim_detail::quantile_index(alpha, s) - 1];
}

/// Monte-Carlo VaR curve over a lambda grid. The error column is half the
/// +-1-stderr order-statistic bracket; the limit is m = 1 - exp(-1/u) for
/// the models with a CLT (tube, Smith, Brown-Resnick).
inline RiskCurve var_curve(const ExtremalModel& model, const Region& region, double u,
                           double alpha, const std::vector<double>& lambdas,
                           int m_per_unit, std::size_t s, std::uint64_t seed,
                           const SimulationOptions& opts = {}) {
    if (s < 100) throw ParameterError("var_curve: need at least 100 replicates");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("var_curve: alpha must lie in (0,1)");
    RiskCurve curve;
    curve.provenance = Provenance::MonteCarlo;
    curve.lambdas = lambdas;
    curve.values.resize(lambdas.size());
    curve.err.resize(lambdas.size());
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (!(lambdas[k] > 0.0)) throw ParameterError("var_curve: lambdas must be > 0");
        if (k > 0 && !(lambdas[k] > lambdas[k - 1]))
            throw ParameterError("var_curve: lambda grid must ascend");
        const GridSpec grid{region, lambdas[k], m_per_unit};
        std::vector<double> losses = simulate_losses(model, grid, u, s, seed, opts);
        std::sort(losses.begin(), losses.end());
        const std::size_t j = sim_detail::quantile_index(alpha, s);
        curve.values[k] = losses[j - 1];
        const double d = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(s));
        const std::size_t jlo = sim_detail::quantile_index(std::max(1e-12, alpha - d), s);
        const std::size_t jhi = sim_detail::quantile_index(std::min(1.0 - 1e-12, alpha + d), s);
        curve.err[k] = 0.5 * (losses[jhi - 1] - losses[jlo - 1]);
    }
    if (model.is<TubeModel>() || model.is<SmithModel>() || model.is<BrownResnickModel>())
        curve.limit = r1_expectation(u);
    return curve;
}

} // namespace spatrisk
