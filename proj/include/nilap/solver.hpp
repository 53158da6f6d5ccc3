#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nilap/detail/parallel.hpp"
#include "nilap/error.hpp"
#include "nilap/grid_domain.hpp"
#include "nilap/nonlocal_operator.hpp"

namespace nilap {

enum class SweepMode { GaussSeidel, Jacobi };
enum class InitKind { ConstantZero, ExteriorMin, Custom };

struct SolverConfig {
    double tol_residual = 1e-8;
    double tol_update = 1e-10;
    int max_sweeps = 10000;
    SweepMode sweep_mode = SweepMode::GaussSeidel;
    double point_tol = 1e-12;
    int point_max_iter = 200;
    InitKind init = InitKind::ConstantZero;
    /// Interior starting values when init == Custom.
    std::optional<Field> custom_init;

    void validate() const {
        if (!(tol_residual > 0.0 && tol_update > 0.0 && point_tol > 0.0))
            throw Error(Errc::ValidationError, "solver tolerances must be positive");
        if (max_sweeps < 1) throw Error(Errc::ValidationError, "max_sweeps must be >= 1");
        if (point_max_iter < 1) throw Error(Errc::ValidationError, "point_max_iter must be >= 1");
        if (init == InitKind::Custom && !custom_init)
            throw Error(Errc::ValidationError, "custom init requested without a field");
    }
};

struct SolveResult {
    Field u;
    double residual_max = 0.0;
    int sweeps_used = 0;
    bool converged = false;
};

/// Thrown when the sweep budget runs out; the partial iterate is attached.
class NotConverged : public Error {
public:
    explicit NotConverged(SolveResult partial)
        : Error(Errc::NotConverged,
                "no convergence after " + std::to_string(partial.sweeps_used) +
                    " sweeps (residual " + std::to_string(partial.residual_max) + ")"),
          partial_(std::move(partial)) {}

    const SolveResult& partial() const { return partial_; }

private:
    SolveResult partial_;
};

/// The defining equation at one node as a function of the trial value t that
/// replaces u(x):
///
///     F(t) = max(0, max_y (u(y) - t) / |x - y|^a) + min(0, min_y (u(y) - t) / |x - y|^a)
///
/// where the zeros are the tail candidate. Each branch is a line of slope
/// -1/|x - y|^a, so F is continuous, piecewise linear and non-increasing.
class PointEquation {
public:
    PointEquation(const NonlocalOperator& op, const Field& u, NodeId x) {
        const auto cap = op.domain().size();
        values_.reserve(cap);
        weights_.reserve(cap);
        op.for_each_candidate(x, Variant::Global, [&](NodeId y, double dp) {
            values_.push_back(u[y]);
            weights_.push_back(1.0 / dp);
        });
        if (values_.empty()) throw Error(Errc::NoCandidates, "node has no grid candidates");
        auto [mn, mx] = std::minmax_element(values_.begin(), values_.end());
        min_value_ = *mn;
        max_value_ = *mx;
    }

    struct Sample {
        double value;
        double slope;  ///< magnitude of the active slope, w(argmax) + w(argmin)
    };

    Sample sample(double t) const {
        double hi = 0.0, lo = 0.0, w_hi = 0.0, w_lo = 0.0;
        const std::size_t n = values_.size();
        for (std::size_t k = 0; k < n; ++k) {
            const double q = (values_[k] - t) * weights_[k];
            if (q > hi) { hi = q; w_hi = weights_[k]; }
            if (q < lo) { lo = q; w_lo = weights_[k]; }
        }
        return {hi + lo, w_hi + w_lo};
    }

    double operator()(double t) const { return sample(t).value; }

    double min_value() const { return min_value_; }
    double max_value() const { return max_value_; }

private:
    std::vector<double> values_;
    std::vector<double> weights_;
    double min_value_ = 0.0;
    double max_value_ = 0.0;
};

inline double point_equation(const NonlocalOperator& op, const Field& u, NodeId x, double t) {
    return PointEquation(op, u, x)(t);
}

/// Root of F(t) = f_x. Brackets with [min candidate, max candidate], widens
/// geometrically, then runs a bracketed Newton iteration that falls back to
/// bisection whenever the step leaves the bracket or stops halving it.
inline double solve_point(const PointEquation& eq, double f_x, const SolverConfig& cfg,
                          std::optional<double> warm_start = std::nullopt) {
    if (!std::isfinite(f_x)) throw Error(Errc::BracketFailure, "right-hand side is not finite");
    double lo = eq.min_value(), hi = eq.max_value();
    const double width = std::max(hi - lo, 1.0);
    double flo = eq(lo) - f_x, fhi = eq(hi) - f_x;
    for (int k = 0; flo < 0.0; ++k) {
        if (k >= 60) throw Error(Errc::BracketFailure, "lower bracket expansion failed");
        hi = lo;
        fhi = flo;
        lo -= width * std::ldexp(1.0, k);
        flo = eq(lo) - f_x;
    }
    for (int k = 0; fhi > 0.0; ++k) {
        if (k >= 60) throw Error(Errc::BracketFailure, "upper bracket expansion failed");
        lo = hi;
        flo = fhi;
        hi += width * std::ldexp(1.0, k);
        fhi = eq(hi) - f_x;
    }
    if (std::abs(flo) <= cfg.point_tol) return lo;
    if (std::abs(fhi) <= cfg.point_tol) return hi;

    double t = (warm_start && *warm_start > lo && *warm_start < hi) ? *warm_start : 0.5 * (lo + hi);
    double prev_step = hi - lo;
    double best_t = t, best_g = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.point_max_iter; ++it) {
        const auto s = eq.sample(t);
        const double g = s.value - f_x;
        if (std::abs(g) < best_g) { best_g = std::abs(g); best_t = t; }
        if (std::abs(g) <= cfg.point_tol) return t;
        if (g > 0.0) lo = t; else hi = t;
        if (!(hi > lo)) break;
        double next = s.slope > 0.0 ? t + g / s.slope : lo - 1.0;
        const double step = std::abs(next - t);
        if (!(next > lo && next < hi) || step > 0.5 * prev_step) {
            next = 0.5 * (lo + hi);
            prev_step = hi - lo;
        } else {
            prev_step = step;
        }
        if (next == t) break;
        t = next;
    }
    return best_t;
}

inline double solve_point(const NonlocalOperator& op, const Field& u, NodeId x, double f_x,
                          const SolverConfig& cfg) {
    return solve_point(PointEquation(op, u, x), f_x, cfg, u[x]);
}

/// Starting field: g on the exterior, the problem's tail value, and the configured
/// interior initialisation.
inline Field initial_field(const ProblemSpec& spec, const GridDomain& domain,
                           const SolverConfig& cfg) {
    Field u = exterior_field(spec, domain, 0.0);
    switch (cfg.init) {
        case InitKind::ConstantZero:
            break;
        case InitKind::ExteriorMin: {
            double m = std::numeric_limits<double>::infinity();
            for (NodeId y : domain.exterior_nodes()) m = std::min(m, u[y]);
            for (NodeId x : domain.interior_nodes()) u[x] = m;
            break;
        }
        case InitKind::Custom: {
            const Field& c = *cfg.custom_init;
            if (c.size() != domain.size())
                throw Error(Errc::ValidationError, "custom init has the wrong number of nodes");
            for (NodeId x : domain.interior_nodes()) u[x] = c[x];
            break;
        }
    }
    if (!u.all_finite()) throw Error(Errc::UnboundedData, "initial field is not finite");
    return u;
}

/// Dirichlet solve of L u = f on Interior nodes with u = g outside and tail C1.
/// Converged means max update <= tol_update and max residual <= tol_residual.
/// Throws NotConverged with the last iterate otherwise.
inline SolveResult solve(const ProblemSpec& spec, const GridDomain& domain,
                         const SolverConfig& cfg) {
    spec.validate();
    cfg.validate();
    const NonlocalOperator op(domain, spec.alpha);
    const std::vector<double> f = sample_rhs(spec, domain);
    SolveResult result;
    result.u = initial_field(spec, domain, cfg);
    Field& u = result.u;
    const auto& interior = domain.interior_nodes();
    std::vector<double> next(interior.size());

    result.residual_max = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        double update = 0.0;
        if (cfg.sweep_mode == SweepMode::GaussSeidel) {
            for (NodeId x : interior) {
                const double t = solve_point(op, u, x, f[x], cfg);
                update = std::max(update, std::abs(t - u[x]));
                u[x] = t;
            }
        } else {
            detail::parallel_for(interior.size(), [&](std::size_t k) {
                next[k] = solve_point(op, u, interior[k], f[interior[k]], cfg);
            });
            for (std::size_t k = 0; k < interior.size(); ++k) {
                update = std::max(update, std::abs(next[k] - u[interior[k]]));
                u[interior[k]] = next[k];
            }
        }
        result.sweeps_used = sweep;
        if (update <= cfg.tol_update) {
            result.residual_max = op.max_residual(u, f);
            if (result.residual_max <= cfg.tol_residual) {
                result.converged = true;
                return result;
            }
        }
    }
    result.residual_max = op.max_residual(u, f);
    throw NotConverged(std::move(result));
}

}  // namespace nilap
