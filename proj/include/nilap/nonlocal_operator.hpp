#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "nilap/error.hpp"
#include "nilap/grid_domain.hpp"

namespace nilap {

/// Sentinel witness for the candidate "at infinity". It is the largest NodeId,
/// so in lexicographic witness order the tail always comes last.
inline constexpr NodeId kTail = std::numeric_limits<NodeId>::max();

enum class Variant {
    Global,   ///< sup/inf over every node except x, plus the tail.
    Closure,  ///< sup/inf over the discrete closure of Omega, no tail.
};

struct OperatorEval {
    double l_minus = 0.0;
    double l_plus = 0.0;
    double l_inf = 0.0;
    NodeId argmin = kTail;
    NodeId argmax = kTail;
};

/// Discrete nonlocal infinity Laplacian on a fixed grid and exponent.
///
/// |y - x|^alpha depends only on the integer offset between two nodes, so the
/// powers are tabulated once per (grid, alpha) and every quotient is a single
/// subtraction and division.
class NonlocalOperator {
public:
    NonlocalOperator(GridDomain domain, double alpha)
        : domain_(std::move(domain)), alpha_(alpha) {
        if (!(alpha_ > 0.0 && alpha_ < 1.0))
            throw Error(Errc::InvalidArgument, "alpha must satisfy 0 < alpha < 1");
        const std::size_t n = domain_.nodes_per_axis();
        const double h = domain_.spacing();
        if (domain_.dim() == 1) {
            dpow_.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                dpow_[i] = std::pow(h * static_cast<double>(i), alpha_);
        } else {
            dpow_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double di = static_cast<double>(i), dj = static_cast<double>(j);
                    dpow_[i * n + j] = std::pow(h * std::sqrt(di * di + dj * dj), alpha_);
                }
            }
        }
    }

    const GridDomain& domain() const { return domain_; }
    double alpha() const { return alpha_; }

    /// |x - y|^alpha for two grid nodes.
    double distance_pow(NodeId x, NodeId y) const {
        const std::size_t n = domain_.nodes_per_axis();
        const std::size_t di = absdiff(domain_.axis_index(x, 0), domain_.axis_index(y, 0));
        if (domain_.dim() == 1) return dpow_[di];
        const std::size_t dj = absdiff(domain_.axis_index(x, 1), domain_.axis_index(y, 1));
        return dpow_[di * n + dj];
    }

    /// Hölder difference quotient (u(y) - u(x)) / |x - y|^alpha; zero for the tail.
    double quotient(const Field& u, NodeId x, NodeId y) const {
        if (y == x) throw Error(Errc::SamePoint, "quotient needs y != x");
        if (y == kTail) return 0.0;
        return (u[y] - u[x]) / distance_pow(x, y);
    }

    /// Calls fn(y, |x-y|^alpha) for every grid candidate y != x of the variant,
    /// in lexicographic order. The tail is not visited.
    template <class Fn>
    void for_each_candidate(NodeId x, Variant variant, Fn&& fn) const {
        const std::size_t n = domain_.nodes_per_axis();
        const bool closure = variant == Variant::Closure;
        if (domain_.dim() == 1) {
            for (std::size_t y = 0; y < n; ++y) {
                if (y == x || (closure && !domain_.in_closure(y))) continue;
                fn(NodeId{y}, dpow_[absdiff(x, y)]);
            }
            return;
        }
        const std::size_t xi = x / n, xj = x % n;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &dpow_[absdiff(xi, i) * n];
            const NodeId base = i * n;
            for (std::size_t j = 0; j < n; ++j) {
                const NodeId y = base + j;
                if (y == x || (closure && !domain_.in_closure(y))) continue;
                fn(y, row[absdiff(xj, j)]);
            }
        }
    }

    /// L-, L+ and their sum at node x. Witnesses are the first attaining
    /// candidate in node order, the tail last.
    OperatorEval evaluate(const Field& u, NodeId x, Variant variant = Variant::Global) const {
        OperatorEval e;
        bool any = false;
        const double ux = u[x];
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for_each_candidate(x, variant, [&](NodeId y, double dp) {
            const double q = (u[y] - ux) / dp;
            if (q < lo) { lo = q; e.argmin = y; }
            if (q > hi) { hi = q; e.argmax = y; }
            any = true;
        });
        if (variant == Variant::Global) {
            if (0.0 < lo) { lo = 0.0; e.argmin = kTail; }
            if (0.0 > hi) { hi = 0.0; e.argmax = kTail; }
            any = true;
        }
        if (!any) throw Error(Errc::NoCandidates, "empty candidate set at node " + std::to_string(x));
        e.l_minus = lo;
        e.l_plus = hi;
        e.l_inf = lo + hi;
        return e;
    }

    /// Residual L(u)(x) - f(x) maximised over Interior nodes in absolute value.
    double max_residual(const Field& u, const std::vector<double>& rhs) const {
        double r = 0.0;
        for (NodeId x : domain_.interior_nodes())
            r = std::max(r, std::abs(evaluate(u, x).l_inf - rhs[x]));
        return r;
    }

private:
    static std::size_t absdiff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

    GridDomain domain_;
    double alpha_;
    std::vector<double> dpow_;
};

/// Parameters of the truncated cone min{|x - x0|^alpha, R^alpha}.
struct ConeParams {
    Point vertex{0.0, 0.0};
    double radius = 1.0;
    double alpha = 0.5;

    void validate() const {
        if (!(radius > 0.0)) throw Error(Errc::InvalidArgument, "cone radius must be positive");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw Error(Errc::InvalidArgument, "alpha must satisfy 0 < alpha < 1");
    }

    double operator()(const Point& x) const {
        return std::min(std::pow(distance(x, vertex), alpha), std::pow(radius, alpha));
    }
};

/// True when every Interior node lies strictly inside B_R(x0).
inline bool cone_covers_interior(const ConeParams& params, const GridDomain& domain) {
    for (NodeId x : domain.interior_nodes())
        if (!(distance(domain.coord(x), params.vertex) < params.radius)) return false;
    return true;
}

/// The cone sampled at every node; its tail is R^alpha, the limit at infinity.
inline Field cone_field(const ConeParams& params, const GridDomain& domain) {
    params.validate();
    Field c(domain.size(), 0.0, std::pow(params.radius, params.alpha));
    for (NodeId i = 0; i < domain.size(); ++i) c[i] = params(domain.coord(i));
    return c;
}

/// min over Exterior nodes and the tail of quotient(u, x0, .).
inline double exterior_lminus(const NonlocalOperator& op, const Field& u, NodeId x0) {
    double best = 0.0;  // tail
    for (NodeId y : op.domain().exterior_nodes())
        if (y != x0) best = std::min(best, op.quotient(u, x0, y));
    return best;
}

/// Barrier w(x) = u(x0) + L C_{x0,R}(x) where L < 0 is the exterior infimum of
/// the quotient at x0. w matches u at x0 and stays below u on the exterior.
inline Field barrier_field(const Field& u, NodeId x0, const ConeParams& params,
                           double lminus_outside, const GridDomain& domain) {
    if (!(lminus_outside < 0.0))
        throw Error(Errc::NonNegativeLminus,
                    "barrier requires a negative exterior infimum; u is constant in this case");
    const Field cone = cone_field(params, domain);
    Field w(domain.size(), 0.0, u[x0] + lminus_outside * cone.tail);
    for (NodeId i = 0; i < domain.size(); ++i) w[i] = u[x0] + lminus_outside * cone[i];
    w[x0] = u[x0];
    return w;
}

}  // namespace nilap
