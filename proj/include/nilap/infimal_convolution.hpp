#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "nilap/detail/parallel.hpp"
#include "nilap/error.hpp"
#include "nilap/grid_domain.hpp"
#include "nilap/nonlocal_operator.hpp"
#include "nilap/solver.hpp"

namespace nilap {

/// Quadratic infimal convolution (Moreau envelope) of a grid field.
struct InfConvResult {
    Field u_eps;
    std::vector<NodeId> argmin;  ///< x* for every node x
    double epsilon = 0.0;
    double L_bound = 0.0;
    double r_eps = 0.0;  ///< sqrt(2 L eps)
};

/// Shift and bound that bring a field into the 0 <= u <= L normal form: the
/// shift is the global minimum over all nodes, L the largest shifted Interior
/// value.
struct Normalization {
    double shift = 0.0;
    double L_bound = 0.0;
};

inline Normalization normalization(const Field& u, const GridDomain& domain) {
    Normalization n;
    n.shift = *std::min_element(u.values.begin(), u.values.end());
    for (NodeId x : domain.interior_nodes()) n.L_bound = std::max(n.L_bound, u[x] - n.shift);
    return n;
}

inline Field shifted(const Field& u, double c) {
    Field s = u;
    for (double& v : s.values) v += c;
    s.tail += c;
    return s;
}

/// Squared node distance from integer offsets.
inline double node_distance_sq(const GridDomain& domain, NodeId a, NodeId b) {
    double s = 0.0;
    for (int ax = 0; ax < domain.dim(); ++ax) {
        const double d = static_cast<double>(domain.axis_index(a, ax)) -
                         static_cast<double>(domain.axis_index(b, ax));
        s += d * d;
    }
    return s * domain.spacing() * domain.spacing();
}

/// u_eps(x) = min_y |x - y|^2 / (2 eps) + u(y) over grid nodes y. The tail is
/// never a minimiser because the quadratic diverges at infinity; u_eps inherits
/// u's limit. Ties go to the first node in lexicographic order.
inline InfConvResult inf_convolve(const Field& u, double epsilon, const GridDomain& domain,
                                  double L_bound = 0.0) {
    if (!(epsilon > 0.0)) throw Error(Errc::InvalidArgument, "epsilon must be positive");
    if (!(L_bound >= 0.0)) throw Error(Errc::InvalidArgument, "L_bound must be >= 0");
    InfConvResult r;
    r.epsilon = epsilon;
    r.L_bound = L_bound;
    r.r_eps = std::sqrt(2.0 * L_bound * epsilon);
    r.u_eps = Field(domain.size(), 0.0, u.tail);
    r.argmin.assign(domain.size(), 0);
    const double inv = 1.0 / (2.0 * epsilon);
    detail::parallel_for(domain.size(), [&](std::size_t x) {
        double best = std::numeric_limits<double>::infinity();
        NodeId arg = x;
        for (NodeId y = 0; y < domain.size(); ++y) {
            const double c = node_distance_sq(domain, x, y) * inv + u[y];
            if (c < best) { best = c; arg = y; }
        }
        r.u_eps[x] = best;
        r.argmin[x] = arg;
    });
    return r;
}

/// f composed with the argmin map on the Omega_eps erosion.
struct ShiftedRhs {
    GridDomain eroded;
    /// f(x*) on eroded Interior nodes, NaN elsewhere.
    std::vector<double> f_tilde;
    /// max of f over Interior nodes in the closed r_eps ball around x.
    std::vector<double> ball_sup;
    bool ball_bound_holds = true;
};

inline ShiftedRhs shifted_rhs(const std::vector<double>& f, const InfConvResult& ic,
                              const GridDomain& domain) {
    ShiftedRhs s{erode(domain, ic.r_eps), {}, {}, true};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.f_tilde.assign(domain.size(), nan);
    s.ball_sup.assign(domain.size(), nan);
    // Small relative slack so nodes exactly at distance r_eps count as inside the ball.
    const double r2 = ic.r_eps * ic.r_eps * (1.0 + 1e-12);
    for (NodeId x : s.eroded.interior_nodes()) {
        const NodeId xs = ic.argmin[x];
        if (!domain.is_interior(xs))
            throw Error(Errc::ArgminOutsideDomain,
                        "argmin of node " + std::to_string(x) +
                            " is outside Omega; check L_bound and epsilon");
        s.f_tilde[x] = f[xs];
        double sup = -std::numeric_limits<double>::infinity();
        for (NodeId y : domain.interior_nodes())
            if (node_distance_sq(domain, x, y) <= r2) sup = std::max(sup, f[y]);
        s.ball_sup[x] = sup;
        if (!(s.f_tilde[x] <= sup)) s.ball_bound_holds = false;
    }
    return s;
}

struct ShiftCheckReport {
    double epsilon = 0.0;
    double L_bound = 0.0;
    double r_eps = 0.0;
    double slack = 0.0;
    std::vector<NodeId> nodes;    ///< eroded Interior nodes
    std::vector<double> margins;  ///< f~(x) + slack - L u_eps(x)
    double max_excess = 0.0;      ///< max of L u_eps(x) - f~(x), without slack
    double max_violation = 0.0;   ///< max of -margin, floored at 0
    bool passed = true;
};

/// Checks that the infimal convolution of a residual-certified solution is a
/// pointwise supersolution for the shifted right-hand side f(x*) on the eroded
/// interior, up to slack = 10 tol_residual + slack_per_h * h.
inline ShiftCheckReport check_supersolution_shift(const Field& u, const ProblemSpec& spec,
                                                  const GridDomain& domain, double epsilon,
                                                  const SolverConfig& cfg,
                                                  double slack_per_h = 1.0) {
    const auto f = sample_rhs(spec, domain);
    const auto norm = normalization(u, domain);
    const Field un = shifted(u, -norm.shift);
    const auto ic = inf_convolve(un, epsilon, domain, norm.L_bound);
    const auto rhs = shifted_rhs(f, ic, domain);
    const NonlocalOperator op(domain, spec.alpha);

    ShiftCheckReport rep;
    rep.epsilon = epsilon;
    rep.L_bound = ic.L_bound;
    rep.r_eps = ic.r_eps;
    rep.slack = 10.0 * cfg.tol_residual + slack_per_h * domain.spacing();
    rep.nodes = rhs.eroded.interior_nodes();
    rep.margins.resize(rep.nodes.size());
    std::vector<double> excess(rep.nodes.size());
    detail::parallel_for(rep.nodes.size(), [&](std::size_t k) {
        const NodeId x = rep.nodes[k];
        excess[k] = op.evaluate(ic.u_eps, x).l_inf - rhs.f_tilde[x];
        rep.margins[k] = rep.slack - excess[k];
    });
    rep.max_excess = excess.empty() ? 0.0 : *std::max_element(excess.begin(), excess.end());
    for (double m : rep.margins) rep.max_violation = std::max(rep.max_violation, -m);
    rep.passed = rep.max_violation == 0.0;
    return rep;
}

/// Largest positive second difference of u_eps(x) - |x|^2 / (2 eps) along any
/// grid line; concavity means this is <= 0 up to rounding.
inline double max_line_convexity(const InfConvResult& ic, const GridDomain& domain) {
    const double inv = 1.0 / (2.0 * ic.epsilon);
    auto v = [&](NodeId x) {
        const Point p = domain.coord(x);
        return ic.u_eps[x] - (p[0] * p[0] + p[1] * p[1]) * inv;
    };
    const std::size_t n = domain.nodes_per_axis();
    double worst = -std::numeric_limits<double>::infinity();
    const std::size_t lines = domain.dim() == 1 ? 1 : n;
    for (int ax = 0; ax < domain.dim(); ++ax) {
        for (std::size_t line = 0; line < lines; ++line) {
            for (std::size_t k = 1; k + 1 < n; ++k) {
                auto at = [&](std::size_t s) {
                    if (domain.dim() == 1) return domain.node_at(s);
                    return ax == 0 ? domain.node_at(s, line) : domain.node_at(line, s);
                };
                worst = std::max(worst, v(at(k - 1)) - 2.0 * v(at(k)) + v(at(k + 1)));
            }
        }
    }
    return worst;
}

}  // namespace nilap
