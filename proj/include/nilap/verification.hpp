#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nilap/error.hpp"
#include "nilap/grid_domain.hpp"
#include "nilap/infimal_convolution.hpp"
#include "nilap/nonlocal_operator.hpp"
#include "nilap/solver.hpp"

namespace nilap {

/// Tolerance for membership in argmin/argmax sets.
inline constexpr double kTieTol = 1e-9;

enum class CheckStatus { Pass, PreconditionViolated, LemmaViolated };

constexpr std::string_view to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::PreconditionViolated: return "precondition_violated";
        case CheckStatus::LemmaViolated: return "lemma_violated";
    }
    return "unknown";
}

enum class WitnessClass { Interior, Exterior, Tail };

constexpr std::string_view to_string(WitnessClass c) {
    switch (c) {
        case WitnessClass::Interior: return "interior";
        case WitnessClass::Exterior: return "exterior";
        case WitnessClass::Tail: return "tail";
    }
    return "unknown";
}

inline WitnessClass classify(const GridDomain& domain, NodeId y) {
    if (y == kTail) return WitnessClass::Tail;
    return domain.is_interior(y) ? WitnessClass::Interior : WitnessClass::Exterior;
}

/// Largest L u(x) - f(x) over Interior nodes. A discrete supersolution has
/// this <= tol; a subsolution has the mirrored quantity <= tol.
inline double supersolution_excess(const NonlocalOperator& op, const Field& u,
                                   const std::vector<double>& f) {
    double worst = -std::numeric_limits<double>::infinity();
    for (NodeId x : op.domain().interior_nodes())
        worst = std::max(worst, op.evaluate(u, x).l_inf - f[x]);
    return worst;
}

inline double subsolution_deficit(const NonlocalOperator& op, const Field& u,
                                  const std::vector<double>& f) {
    double worst = -std::numeric_limits<double>::infinity();
    for (NodeId x : op.domain().interior_nodes())
        worst = std::max(worst, f[x] - op.evaluate(u, x).l_inf);
    return worst;
}

// ---------------------------------------------------------------------------
// Touching test

struct TouchingTest {
    bool touches = false;  ///< phi <= u (or >=) on every node, equal at x0
    double phi_value = 0.0;  ///< L phi(x0)
    double u_value = 0.0;    ///< L u(x0)
    bool satisfied = false;  ///< L phi(x0) <= f(x0) + tol (>= f - tol from above)
};

/// Grid version of the test-function definition: if phi touches u from below
/// at x0, a supersolution needs L phi(x0) <= f(x0). With `from_above` the
/// subsolution inequality is checked instead.
inline TouchingTest touching_test(const NonlocalOperator& op, const Field& u, const Field& phi,
                                  NodeId x0, double f_x0, double tol, bool from_above = false) {
    TouchingTest t;
    t.touches = phi[x0] == u[x0];
    for (NodeId i = 0; i < u.size() && t.touches; ++i)
        t.touches = from_above ? phi[i] >= u[i] : phi[i] <= u[i];
    t.phi_value = op.evaluate(phi, x0).l_inf;
    t.u_value = op.evaluate(u, x0).l_inf;
    t.satisfied = from_above ? t.phi_value >= f_x0 - tol : t.phi_value <= f_x0 + tol;
    return t;
}

// ---------------------------------------------------------------------------
// Strong maximum principle

struct MaxPrincipleReport {
    bool supersolution = false;  ///< residual-certified precondition
    double supersolution_excess = 0.0;
    double min_interior = 0.0;
    NodeId min_interior_node = 0;
    double min_outside = 0.0;  ///< over Exterior nodes and the tail
    NodeId min_outside_node = kTail;
    double oscillation = 0.0;
    bool hypothesis_met = false;  ///< some Interior value <= min_outside + tie_tol
    bool constant = false;
    std::vector<NodeId> violations;  ///< Interior nodes at or below the outside minimum
    CheckStatus status = CheckStatus::Pass;
    bool passed() const { return status == CheckStatus::Pass; }
};

/// If an Interior node is no larger than every Exterior value and the tail,
/// a supersolution must be constant. Otherwise the global minimum sits
/// outside Omega and the check passes.
inline MaxPrincipleReport check_strong_max(const NonlocalOperator& op, const Field& u,
                                           const std::vector<double>& f, double tol,
                                           double tie_tol = kTieTol) {
    const auto& dom = op.domain();
    MaxPrincipleReport r;
    r.supersolution_excess = supersolution_excess(op, u, f);
    r.supersolution = r.supersolution_excess <= tol;

    r.min_interior = std::numeric_limits<double>::infinity();
    for (NodeId x : dom.interior_nodes())
        if (u[x] < r.min_interior) { r.min_interior = u[x]; r.min_interior_node = x; }
    r.min_outside = std::numeric_limits<double>::infinity();
    for (NodeId y : dom.exterior_nodes())
        if (u[y] < r.min_outside) { r.min_outside = u[y]; r.min_outside_node = y; }
    if (u.tail < r.min_outside) { r.min_outside = u.tail; r.min_outside_node = kTail; }

    auto [mn, mx] = std::minmax_element(u.values.begin(), u.values.end());
    r.oscillation = std::max(*mx, u.tail) - std::min(*mn, u.tail);
    r.constant = r.oscillation <= tie_tol;
    r.hypothesis_met = r.min_interior <= r.min_outside + tie_tol;
    if (r.hypothesis_met && !r.constant) {
        for (NodeId x : dom.interior_nodes())
            if (u[x] <= r.min_outside + tie_tol) r.violations.push_back(x);
    }
    if (!r.supersolution)
        r.status = CheckStatus::PreconditionViolated;
    else if (!r.violations.empty())
        r.status = CheckStatus::LemmaViolated;
    return r;
}

// ---------------------------------------------------------------------------
// Attainment of the infimum outside Omega

struct AttainmentEntry {
    NodeId node = 0;
    double l_minus = 0.0;
    WitnessClass witness = WitnessClass::Tail;
    double best_interior = 0.0;  ///< +inf when x is the only Interior node
    double best_outside = 0.0;   ///< over Exterior nodes and the tail
    double margin = 0.0;         ///< best_interior - best_outside
};

struct AttainmentReport {
    bool supersolution = false;
    double supersolution_excess = 0.0;
    std::vector<AttainmentEntry> entries;
    std::vector<NodeId> violations;  ///< margin < -tie_tol
    CheckStatus status = CheckStatus::Pass;
    bool passed() const { return status == CheckStatus::Pass; }
};

/// For a supersolution, the infimum of the quotient at every Interior node is
/// attained on the Exterior or the tail. Ties within tie_tol count as attained.
inline AttainmentReport check_attainment(const NonlocalOperator& op, const Field& u,
                                         const std::vector<double>& f, double tol,
                                         double tie_tol = kTieTol) {
    const auto& dom = op.domain();
    AttainmentReport r;
    r.supersolution_excess = supersolution_excess(op, u, f);
    r.supersolution = r.supersolution_excess <= tol;
    r.entries.reserve(dom.interior_nodes().size());
    for (NodeId x : dom.interior_nodes()) {
        AttainmentEntry e;
        e.node = x;
        const auto ev = op.evaluate(u, x);
        e.l_minus = ev.l_minus;
        e.witness = classify(dom, ev.argmin);
        double best_in = std::numeric_limits<double>::infinity();
        double best_out = 0.0;  // tail
        op.for_each_candidate(x, Variant::Global, [&](NodeId y, double dp) {
            const double q = (u[y] - u[x]) / dp;
            if (dom.is_interior(y)) best_in = std::min(best_in, q);
            else best_out = std::min(best_out, q);
        });
        e.best_interior = best_in;
        e.best_outside = best_out;
        e.margin = best_in - best_out;
        if (e.margin < -tie_tol) r.violations.push_back(x);
        r.entries.push_back(e);
    }
    if (!r.supersolution)
        r.status = CheckStatus::PreconditionViolated;
    else if (!r.violations.empty())
        r.status = CheckStatus::LemmaViolated;
    return r;
}

// ---------------------------------------------------------------------------
// Truncation of an unbounded supersolution

struct TruncationResult {
    Field u_tilde;
    double K = 0.0;           ///< used level: sufficient condition via d_y
    double K_pairwise = 0.0;  ///< smallest K with (u(y)-K)/|y-x0|^a <= f(x0) for all pairs
    double K_exact = 0.0;     ///< smallest K with inf_y (u(y)-K)/|y-x0|^a <= f(x0) for all x0
    std::size_t truncated = 0;
    double residual_excess = 0.0;  ///< max over Interior of L u~ - f
    bool supersolution_preserved = false;
};

/// Caps u at K on Omega, where K >= sup of u outside and
/// (u(y) - K) / d_y^a <= inf f with d_y the largest distance from y to Omega.
inline TruncationResult truncate_supersolution(const NonlocalOperator& op, const Field& u,
                                               const std::vector<double>& f, double tol_residual) {
    const auto& dom = op.domain();
    if (!u.all_finite()) throw Error(Errc::UnboundedData, "field has non-finite values");
    double inf_f = std::numeric_limits<double>::infinity();
    for (NodeId x : dom.interior_nodes()) {
        if (!std::isfinite(f[x])) throw Error(Errc::UnboundedData, "f is not finite");
        inf_f = std::min(inf_f, f[x]);
    }
    double sup_ext = -std::numeric_limits<double>::infinity();
    for (NodeId y : dom.exterior_nodes()) sup_ext = std::max(sup_ext, u[y]);

    TruncationResult r;
    r.K = r.K_pairwise = r.K_exact = sup_ext;
    for (NodeId y : dom.exterior_nodes()) {
        double dmax = 0.0;
        for (NodeId x : dom.interior_nodes()) dmax = std::max(dmax, op.distance_pow(x, y));
        r.K = std::max(r.K, u[y] - inf_f * dmax);
        for (NodeId x : dom.interior_nodes())
            r.K_pairwise = std::max(r.K_pairwise, u[y] - f[x] * op.distance_pow(x, y));
    }
    for (NodeId x : dom.interior_nodes()) {
        if (f[x] >= 0.0) continue;  // the tail candidate already gives 0 <= f(x0)
        double need = std::numeric_limits<double>::infinity();
        for (NodeId y : dom.exterior_nodes())
            need = std::min(need, u[y] - f[x] * op.distance_pow(x, y));
        r.K_exact = std::max(r.K_exact, need);
    }

    r.u_tilde = u;
    for (NodeId x : dom.interior_nodes()) {
        if (u[x] > r.K) {
            r.u_tilde[x] = r.K;
            ++r.truncated;
        }
    }
    r.residual_excess = supersolution_excess(op, r.u_tilde, f);
    r.supersolution_preserved = r.residual_excess <= 10.0 * tol_residual;
    return r;
}

// ---------------------------------------------------------------------------
// Comparison

struct ComparisonReport {
    double M = 0.0;  ///< max of v - u over nodes and the tail
    std::vector<NodeId> K0;
    double epsilon = 0.0;
    double M_eps = 0.0;  ///< max of v - u_eps
    std::vector<NodeId> K_eps;
    std::vector<NodeId> violation_nodes;  ///< Interior nodes with v > u + tol
    double max_excess = 0.0;              ///< max over Interior of v - u
    bool passed = false;
};

inline std::vector<NodeId> near_max_set(const std::vector<double>& d, double m, double tie_tol) {
    std::vector<NodeId> s;
    for (NodeId i = 0; i < d.size(); ++i)
        if (d[i] >= m - tie_tol) s.push_back(i);
    return s;
}

/// Compares a supersolution u against a subsolution v that lies below it on
/// the exterior and at infinity. Throws HypothesisViolation when the exterior
/// ordering fails.
inline ComparisonReport run_comparison(const GridDomain& domain, const Field& u, const Field& v,
                                       double tol, double epsilon = 0.05,
                                       double tie_tol = kTieTol) {
    if (u.size() != domain.size() || v.size() != domain.size())
        throw Error(Errc::InvalidArgument, "field sizes do not match the grid");
    for (NodeId y : domain.exterior_nodes())
        if (v[y] > u[y] + tol)
            throw Error(Errc::HypothesisViolation,
                        "v > u on exterior node " + std::to_string(y));
    if (v.tail > u.tail + tol)
        throw Error(Errc::HypothesisViolation, "limit of v exceeds limit of u");

    ComparisonReport r;
    std::vector<double> diff(domain.size());
    for (NodeId i = 0; i < domain.size(); ++i) diff[i] = v[i] - u[i];
    r.M = std::max(*std::max_element(diff.begin(), diff.end()), v.tail - u.tail);
    r.K0 = near_max_set(diff, r.M, tie_tol);

    r.epsilon = epsilon;
    const auto ic = inf_convolve(u, epsilon, domain);
    std::vector<double> diff_eps(domain.size());
    for (NodeId i = 0; i < domain.size(); ++i) diff_eps[i] = v[i] - ic.u_eps[i];
    r.M_eps = std::max(*std::max_element(diff_eps.begin(), diff_eps.end()), v.tail - ic.u_eps.tail);
    r.K_eps = near_max_set(diff_eps, r.M_eps, tie_tol);

    r.max_excess = -std::numeric_limits<double>::infinity();
    for (NodeId x : domain.interior_nodes()) {
        r.max_excess = std::max(r.max_excess, diff[x]);
        if (diff[x] > tol) r.violation_nodes.push_back(x);
    }
    r.passed = r.violation_nodes.empty();
    return r;
}

// ---------------------------------------------------------------------------
// Strict-supersolution perturbation

struct PerturbationParams {
    double tau = 0.5;
    double beta_nbhd = 0.25;
    /// Cutoff; built from the distance to the exterior when empty.
    std::optional<Field> eta;
};

inline double smoothstep01(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

/// eta = 1 within distance r of the exterior (and at infinity), 0 beyond tau,
/// a smoothstep of the distance in between.
inline Field make_cutoff(const GridDomain& domain, double r_eps, double tau) {
    if (!(tau > r_eps)) throw Error(Errc::InvalidArgument, "cutoff needs tau > r(eps)");
    const auto dist = domain.distance_to_exterior();
    Field eta(domain.size(), 0.0, 1.0);
    for (NodeId i = 0; i < domain.size(); ++i) {
        if (dist[i] <= r_eps) eta[i] = 1.0;
        else if (dist[i] >= tau) eta[i] = 0.0;
        else eta[i] = 1.0 - smoothstep01((dist[i] - r_eps) / (tau - r_eps));
    }
    return eta;
}

/// Checks the three bands of the cutoff against the erosion distances.
inline bool cutoff_valid(const GridDomain& domain, const Field& eta, double r_eps, double tau) {
    const auto dist = domain.distance_to_exterior();
    if (eta.tail != 1.0) return false;
    for (NodeId i = 0; i < domain.size(); ++i) {
        if (!(eta[i] >= 0.0 && eta[i] <= 1.0)) return false;
        if (dist[i] <= r_eps && eta[i] != 1.0) return false;
        if (dist[i] > tau && eta[i] != 0.0) return false;
    }
    return true;
}

struct GapEntry {
    NodeId node = 0;
    double lplus_phi = 0.0, lplus_phi_tilde = 0.0;
    double lminus_phi = 0.0, lminus_phi_tilde = 0.0;
    double linf_phi = 0.0, linf_phi_tilde = 0.0;
    double gap = 0.0;          ///< L phi - L phi~
    double delta_proof = 0.0;  ///< M_eps / (4 |y - x|^a) at the L- witness y of phi
    NodeId lminus_witness = kTail;
    bool plus_ok = false, minus_ok = false, total_ok = false;
    double dist_to_K0 = 0.0;
};

struct PerturbationReport {
    bool vacuous = false;          ///< M_eps <= tie_tol: nothing to dissect
    bool cutoff_valid = false;
    bool applicable = false;       ///< cutoff valid and non-degenerate
    double epsilon = 0.0, r_eps = 0.0, tau = 0.0;
    double M = 0.0, M_eps = 0.0;
    double delta = 0.0;            ///< M_eps / (4 diam_box^a)
    std::vector<NodeId> K0, K_eps;
    bool K_eps_in_omega_tau = false;
    bool K_eps_localized = false;  ///< every K_eps node within beta_nbhd of K0
    std::vector<GapEntry> entries;
    double min_gap_margin = 0.0;   ///< min over K_eps of gap - delta
    bool passed = false;
};

/// Builds phi = u_eps + M_eps and phi~ = phi - (M_eps/4) eta and measures, at
/// each maximiser x of v - u_eps, that L+ does not increase and L- drops by at
/// least delta, so phi~ is a strict supersolution there.
inline PerturbationReport perturbation_gap_experiment(const NonlocalOperator& op, const Field& u,
                                                      const Field& v, double epsilon,
                                                      const PerturbationParams& params,
                                                      double tie_tol = kTieTol) {
    const auto& dom = op.domain();
    PerturbationReport r;
    r.epsilon = epsilon;
    r.tau = params.tau;
    const auto norm = normalization(u, dom);
    const auto ic = inf_convolve(u, epsilon, dom, norm.L_bound);
    r.r_eps = ic.r_eps;

    std::vector<double> d0(dom.size()), de(dom.size());
    for (NodeId i = 0; i < dom.size(); ++i) {
        d0[i] = v[i] - u[i];
        de[i] = v[i] - ic.u_eps[i];
    }
    r.M = *std::max_element(d0.begin(), d0.end());
    r.M_eps = *std::max_element(de.begin(), de.end());
    r.K0 = near_max_set(d0, r.M, tie_tol);
    r.K_eps = near_max_set(de, r.M_eps, tie_tol);
    if (r.M_eps <= tie_tol) {
        r.vacuous = true;
        r.passed = true;
        return r;
    }

    const Field eta = params.eta ? *params.eta : make_cutoff(dom, ic.r_eps, params.tau);
    r.cutoff_valid = cutoff_valid(dom, eta, ic.r_eps, params.tau);
    bool nonzero = false;
    for (double e : eta.values) nonzero = nonzero || e != 0.0;
    r.applicable = r.cutoff_valid && nonzero;

    r.K_eps_in_omega_tau = true;
    for (NodeId x : r.K_eps) r.K_eps_in_omega_tau = r.K_eps_in_omega_tau && eta[x] == 0.0;
    r.K_eps_localized = true;

    Field phi = shifted(ic.u_eps, r.M_eps);
    Field phi_t = phi;
    for (NodeId i = 0; i < dom.size(); ++i) phi_t[i] -= 0.25 * r.M_eps * eta[i];
    phi_t.tail -= 0.25 * r.M_eps * eta.tail;

    r.delta = r.M_eps / (4.0 * std::pow(dom.box_diameter(), op.alpha()));
    r.min_gap_margin = std::numeric_limits<double>::infinity();
    constexpr double round = 1e-12;
    for (NodeId x : r.K_eps) {
        GapEntry g;
        g.node = x;
        const auto a = op.evaluate(phi, x);
        const auto b = op.evaluate(phi_t, x);
        g.lplus_phi = a.l_plus;
        g.lplus_phi_tilde = b.l_plus;
        g.lminus_phi = a.l_minus;
        g.lminus_phi_tilde = b.l_minus;
        g.linf_phi = a.l_inf;
        g.linf_phi_tilde = b.l_inf;
        g.gap = a.l_inf - b.l_inf;
        g.lminus_witness = a.argmin;
        g.delta_proof = a.argmin == kTail
                            ? 0.0
                            : r.M_eps / (4.0 * op.distance_pow(x, a.argmin));
        g.plus_ok = b.l_plus <= a.l_plus + round;
        g.minus_ok = b.l_minus <= a.l_minus - r.delta + round;
        g.total_ok = g.gap >= r.delta - round;
        g.dist_to_K0 = std::numeric_limits<double>::infinity();
        for (NodeId k : r.K0) g.dist_to_K0 = std::min(g.dist_to_K0, dom.node_distance(x, k));
        r.K_eps_localized = r.K_eps_localized && g.dist_to_K0 <= params.beta_nbhd;
        r.min_gap_margin = std::min(r.min_gap_margin, g.gap - r.delta);
        r.entries.push_back(g);
    }
    r.passed = r.applicable;
    for (const auto& g : r.entries) r.passed = r.passed && g.plus_ok && g.minus_ok && g.total_ok;
    return r;
}

struct LocalizationStep {
    double epsilon = 0.0;
    double M_eps = 0.0;
    std::size_t K_eps_size = 0;
    double max_dist_to_K0 = 0.0;
    bool localized = false;  ///< max_dist_to_K0 <= beta_nbhd
};

/// Distance from the maximisers of v - u_eps to those of v - u, for each eps.
inline std::vector<LocalizationStep> keps_localization(const GridDomain& dom, const Field& u,
                                                       const Field& v,
                                                       const std::vector<double>& epsilons,
                                                       double beta_nbhd, double tie_tol = kTieTol) {
    std::vector<double> d0(dom.size());
    for (NodeId i = 0; i < dom.size(); ++i) d0[i] = v[i] - u[i];
    const auto K0 = near_max_set(d0, *std::max_element(d0.begin(), d0.end()), tie_tol);
    std::vector<LocalizationStep> out;
    for (double eps : epsilons) {
        const auto ic = inf_convolve(u, eps, dom);
        std::vector<double> de(dom.size());
        for (NodeId i = 0; i < dom.size(); ++i) de[i] = v[i] - ic.u_eps[i];
        LocalizationStep st;
        st.epsilon = eps;
        st.M_eps = *std::max_element(de.begin(), de.end());
        const auto K = near_max_set(de, st.M_eps, tie_tol);
        st.K_eps_size = K.size();
        for (NodeId x : K) {
            double best = std::numeric_limits<double>::infinity();
            for (NodeId k : K0) best = std::min(best, dom.node_distance(x, k));
            st.max_dist_to_K0 = std::max(st.max_dist_to_K0, best);
        }
        st.localized = st.max_dist_to_K0 <= beta_nbhd;
        out.push_back(st);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Uniqueness probe

struct InitSpec {
    InitKind kind = InitKind::ConstantZero;
    std::uint64_t seed = 0;  ///< for Random
    bool random = false;

    static InitSpec zero() { return {InitKind::ConstantZero, 0, false}; }
    static InitSpec exterior_min() { return {InitKind::ExteriorMin, 0, false}; }
    static InitSpec randomized(std::uint64_t seed) { return {InitKind::Custom, seed, true}; }

    std::string label() const {
        if (random) return "random:" + std::to_string(seed);
        return kind == InitKind::ExteriorMin ? "exterior_min" : "zero";
    }
};

/// Uniform values in [lo, hi) from an explicit seed. The bit-to-double mapping
/// is spelled out so the same seed gives the same field on every platform.
inline Field random_field(std::size_t n, std::uint64_t seed, double lo, double hi,
                          double tail = 0.0) {
    std::mt19937_64 gen(seed);
    Field u(n, 0.0, tail);
    for (auto& x : u.values) {
        const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        x = lo + (hi - lo) * unit;
    }
    return u;
}

struct UniquenessRun {
    std::string init;
    SolveResult result;
};

struct UniquenessReport {
    std::vector<UniquenessRun> runs;
    double max_deviation = 0.0;
    bool asserted = false;  ///< f <= 0 everywhere, so agreement is required
    double threshold = 0.0;
    bool passed = true;
};

inline SolverConfig with_init(SolverConfig cfg, const InitSpec& init, const GridDomain& domain,
                              const ProblemSpec& spec) {
    cfg.init = init.kind;
    if (init.random) {
        const Field g = exterior_field(spec, domain);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (NodeId y : domain.exterior_nodes()) {
            lo = std::min(lo, g[y]);
            hi = std::max(hi, g[y]);
        }
        cfg.custom_init = random_field(domain.size(), init.seed, lo - 1.0, hi + 1.0);
    }
    return cfg;
}

/// Solves from each initialisation and reports the largest pairwise max-norm
/// deviation. Agreement within 10 tol_residual is asserted only when f <= 0.
inline UniquenessReport uniqueness_probe(const ProblemSpec& spec, const GridDomain& domain,
                                         const SolverConfig& cfg,
                                         const std::vector<InitSpec>& inits) {
    if (inits.size() < 2)
        throw Error(Errc::InvalidArgument, "uniqueness probe needs at least two initialisations");
    UniquenessReport rep;
    ProblemSpec relaxed = spec;
    relaxed.strict_sign_check = false;
    const auto f = sample_rhs(relaxed, domain);
    rep.asserted = std::all_of(domain.interior_nodes().begin(), domain.interior_nodes().end(),
                               [&](NodeId x) { return f[x] <= 0.0; });
    rep.threshold = 10.0 * cfg.tol_residual;
    for (const auto& init : inits)
        rep.runs.push_back({init.label(), solve(spec, domain, with_init(cfg, init, domain, spec))});
    for (std::size_t a = 0; a < rep.runs.size(); ++a)
        for (std::size_t b = a + 1; b < rep.runs.size(); ++b)
            for (NodeId i = 0; i < domain.size(); ++i)
                rep.max_deviation = std::max(
                    rep.max_deviation,
                    std::abs(rep.runs[a].result.u[i] - rep.runs[b].result.u[i]));
    rep.passed = !rep.asserted || rep.max_deviation <= rep.threshold;
    return rep;
}

}  // namespace nilap
