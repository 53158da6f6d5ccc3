#include <gtest/gtest.h>

#include <cmath>

#include "nilap/runner.hpp"
#include "nilap/verification.hpp"
#include "support.hpp"

using namespace nilap;
using namespace testing_support;

namespace {

struct Bump {
    ProblemSpec spec = spec_1d(0.5, constant(-1.0), constant(0.0));
    GridDomain d = build_grid(spec, 2.0, 101);
    NonlocalOperator op{d, spec.alpha};
    std::vector<double> f = sample_rhs(spec, d);
    SolverConfig cfg;
    SolveResult r = solve(spec, d, cfg);
};

const Bump& bump() {
    static const Bump b;
    return b;
}

}  // namespace

TEST(StrongMax, ConstantField) {
    const auto& b = bump();
    const Field u(b.d.size(), 3.0, 3.0);
    const std::vector<double> zero(b.d.size(), 0.0);
    const auto r = check_strong_max(b.op, u, zero, 1e-8);
    EXPECT_TRUE(r.constant);
    EXPECT_TRUE(r.passed());
    EXPECT_TRUE(r.violations.empty());
}

TEST(StrongMax, SolvedBumpAttainsMinimumOutside) {
    const auto& b = bump();
    const auto r = check_strong_max(b.op, b.r.u, b.f, b.cfg.tol_residual);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.min_outside, 0.0);
    EXPECT_GT(r.min_interior, r.min_outside);
    EXPECT_FALSE(r.hypothesis_met);
}

TEST(StrongMax, IsolatedInteriorMinimumIsPreconditionFailure) {
    const auto& b = bump();
    Field u = b.r.u;
    u[50] = -1.0;  // strict interior minimum
    const auto r = check_strong_max(b.op, u, b.f, b.cfg.tol_residual);
    EXPECT_FALSE(r.supersolution);
    EXPECT_EQ(r.status, CheckStatus::PreconditionViolated);
    EXPECT_EQ(r.violations, (std::vector<NodeId>{50}));
}

TEST(Attainment, ConstantFieldTies) {
    const auto& b = bump();
    const Field u(b.d.size(), -4.0, -4.0);
    const std::vector<double> zero(b.d.size(), 0.0);
    const auto r = check_attainment(b.op, u, zero, 1e-8);
    EXPECT_TRUE(r.passed());
    for (const auto& e : r.entries) EXPECT_EQ(e.margin, 0.0);
}

TEST(Attainment, SolvedBumpWitnessesAreExterior) {
    const auto& b = bump();
    const auto r = check_attainment(b.op, b.r.u, b.f, b.cfg.tol_residual);
    EXPECT_TRUE(r.passed());
    ASSERT_EQ(r.entries.size(), b.d.interior_nodes().size());
    for (const auto& e : r.entries) {
        EXPECT_EQ(e.witness, WitnessClass::Exterior) << e.node;
        EXPECT_GE(e.margin, 0.0);
    }
}

TEST(Attainment, RandomFieldReportsViolations) {
    const auto& b = bump();
    Gen gen(21);
    Field u = gen.field(b.d.size(), 0, 1);
    for (NodeId x : b.d.interior_nodes()) u[x] = gen.uniform(-1, 1);
    const auto r = check_attainment(b.op, u, b.f, b.cfg.tol_residual);
    EXPECT_FALSE(r.violations.empty());
    EXPECT_FALSE(r.passed());
}

TEST(Touching, SolvedBumpPassesFromBelowAndAbove) {
    const auto& b = bump();
    const NodeId x0 = 50;
    // phi = u - |x - x0|^2 touches from below at x0; L is monotone so L phi <= L u = f.
    Field below = b.r.u, above = b.r.u;
    for (NodeId i = 0; i < b.d.size(); ++i) {
        const double s = b.d.node_distance(i, x0);
        below[i] -= s * s;
        above[i] += s * s;
    }
    const auto t = touching_test(b.op, b.r.u, below, x0, b.f[x0], 1e-8);
    EXPECT_TRUE(t.touches);
    EXPECT_TRUE(t.satisfied);
    const auto s = touching_test(b.op, b.r.u, above, x0, b.f[x0], 1e-8, true);
    EXPECT_TRUE(s.touches);
    EXPECT_TRUE(s.satisfied);
}

TEST(Truncation, BoundedFieldWithZeroRhs) {
    const auto d = build_grid(interval(-1, 1), 1, 2.0, 21);
    const NonlocalOperator op(d, 0.5);
    // Constant 5: L u = 0 <= f everywhere, and K from the exterior data is 5.
    const Field u(d.size(), 5.0, 5.0);
    const std::vector<double> f(d.size(), 0.0);
    const auto r = truncate_supersolution(op, u, f, 1e-8);
    EXPECT_EQ(r.K, 5.0);
    EXPECT_EQ(r.truncated, 0u);
    EXPECT_EQ(r.u_tilde.values, u.values);
    EXPECT_TRUE(r.supersolution_preserved);
}

TEST(Truncation, SufficientLevelFromFarthestDistance) {
    // Omega = (-1.25, 1.25) on nodes -2..2 step 0.5: Interior {-1,...,1},
    // Exterior {-2,-1.5,1.5,2}; the farthest exterior-to-interior distance is 3.
    const auto d = build_grid(interval(-1.25, 1.25), 1, 2.0, 9);
    const NonlocalOperator op(d, 0.5);
    Field u(d.size(), 1.0, 1.0);
    for (NodeId x : d.interior_nodes()) u[x] = 10.0;
    const std::vector<double> f(d.size(), -1.0);
    const auto r = truncate_supersolution(op, u, f, 1e-8);
    EXPECT_NEAR(r.K, 1.0 + std::sqrt(3.0), 1e-14);
    // Exact level: every x0 needs one y with (1 - K) / |y - x0|^a <= -1, so
    // K_exact = 1 + max over x0 of (nearest exterior distance)^a; the origin
    // is 1.5 away from the exterior.
    EXPECT_NEAR(r.K_exact, 1.0 + std::sqrt(1.5), 1e-14);
    EXPECT_NEAR(r.K_pairwise, 1.0 + std::sqrt(3.0), 1e-14);
    EXPECT_LE(r.K_exact, r.K_pairwise);
    EXPECT_LE(r.K_pairwise, r.K);
    EXPECT_EQ(r.truncated, d.interior_nodes().size());
    for (NodeId x : d.interior_nodes()) EXPECT_EQ(r.u_tilde[x], r.K);
    EXPECT_TRUE(r.supersolution_preserved);
    EXPECT_LE(r.residual_excess, 0.0);
}

TEST(Truncation, IdempotentBelowLevel) {
    const auto& b = bump();
    const auto r = truncate_supersolution(b.op, b.r.u, b.f, b.cfg.tol_residual);
    EXPECT_EQ(r.truncated, 0u);
    EXPECT_EQ(r.u_tilde.values, b.r.u.values);
    const auto again = truncate_supersolution(b.op, r.u_tilde, b.f, b.cfg.tol_residual);
    EXPECT_EQ(again.u_tilde.values, r.u_tilde.values);
}

TEST(Truncation, NonFiniteData) {
    const auto& b = bump();
    Field u = b.r.u;
    u[0] = INFINITY;
    try {
        truncate_supersolution(b.op, u, b.f, 1e-8);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnboundedData);
    }
}

TEST(Comparison, IdenticalFields) {
    const auto& b = bump();
    const auto r = run_comparison(b.d, b.r.u, b.r.u, 1e-7);
    EXPECT_EQ(r.M, 0.0);
    EXPECT_EQ(r.K0.size(), b.d.size());
    EXPECT_TRUE(r.passed);
}

TEST(Comparison, LargerRhsGivesSmallerSolution) {
    const auto& b = bump();
    auto half = b.spec;
    half.rhs = constant(-0.5);
    const auto v = solve(half, b.d, b.cfg);
    const auto r = run_comparison(b.d, b.r.u, v.u, 10 * b.cfg.tol_residual);
    EXPECT_TRUE(r.passed);
    for (NodeId i = 0; i < b.d.size(); ++i) EXPECT_LE(v.u[i], b.r.u[i] + 10 * b.cfg.tol_residual);
}

TEST(Comparison, ExteriorOrderingIsAHypothesis) {
    const auto& b = bump();
    Field v = b.r.u;
    v[b.d.exterior_nodes()[3]] += 1.0;
    try {
        run_comparison(b.d, b.r.u, v, 1e-7);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::HypothesisViolation);
    }
}

TEST(Comparison, InteriorViolationIsReported) {
    const auto& b = bump();
    Field v = b.r.u;
    v[50] += 0.1;
    const auto r = run_comparison(b.d, b.r.u, v, 1e-7);
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(r.violation_nodes, (std::vector<NodeId>{50}));
    EXPECT_EQ(r.K0, (std::vector<NodeId>{50}));
}

TEST(Cutoff, ThreeBands) {
    const auto& b = bump();
    const auto eta = make_cutoff(b.d, 0.1, 0.4);
    EXPECT_TRUE(cutoff_valid(b.d, eta, 0.1, 0.4));
    const auto dist = b.d.distance_to_exterior();
    for (NodeId i = 0; i < b.d.size(); ++i) {
        if (dist[i] <= 0.1) { EXPECT_EQ(eta[i], 1.0); }
        if (dist[i] >= 0.4) { EXPECT_EQ(eta[i], 0.0); }
    }
    EXPECT_THROW(make_cutoff(b.d, 0.4, 0.1), Error);
}

TEST(Perturbation, ConvergedPairIsVacuous) {
    const auto& b = bump();
    const auto v = solve(dominated_variants(b.spec).back().second, b.d, b.cfg);
    const auto planted = planted_violation(b.d, b.r.u);
    const auto r = perturbation_gap_experiment(b.op, b.r.u, v.u, planted.epsilon, planted.params);
    EXPECT_TRUE(r.vacuous);
    EXPECT_TRUE(r.entries.empty());
}

TEST(Perturbation, PlantedViolationHasGap) {
    const auto& b = bump();
    const auto planted = planted_violation(b.d, b.r.u);
    const auto r = perturbation_gap_experiment(b.op, b.r.u, planted.v, planted.epsilon, planted.params);
    ASSERT_FALSE(r.vacuous);
    EXPECT_TRUE(r.applicable);
    EXPECT_TRUE(r.K_eps_in_omega_tau);
    EXPECT_GT(r.delta, 0.0);
    EXPECT_DOUBLE_EQ(r.delta, r.M_eps / (4 * std::pow(4.0, 0.5)));
    ASSERT_FALSE(r.entries.empty());
    for (const auto& g : r.entries) {
        EXPECT_TRUE(g.plus_ok);
        EXPECT_TRUE(g.minus_ok);
        EXPECT_GE(g.gap, r.delta - 1e-12);
        EXPECT_EQ(classify(b.d, g.lminus_witness), WitnessClass::Exterior);
    }
    EXPECT_TRUE(r.passed);
}

TEST(Perturbation, ZeroCutoffNotApplicable) {
    const auto& b = bump();
    const auto planted = planted_violation(b.d, b.r.u);
    PerturbationParams p = planted.params;
    p.eta = Field(b.d.size(), 0.0, 0.0);
    const auto r = perturbation_gap_experiment(b.op, b.r.u, planted.v, planted.epsilon, p);
    EXPECT_FALSE(r.applicable);
    EXPECT_FALSE(r.passed);
    for (const auto& g : r.entries) EXPECT_EQ(g.gap, 0.0);
}

TEST(Perturbation, KEpsApproachesK0) {
    const auto& b = bump();
    const auto planted = planted_violation(b.d, b.r.u);
    const auto steps = keps_localization(b.d, b.r.u, planted.v,
                                         {4 * planted.epsilon, 2 * planted.epsilon, planted.epsilon},
                                         planted.params.beta_nbhd);
    ASSERT_EQ(steps.size(), 3u);
    for (const auto& s : steps) EXPECT_TRUE(s.localized) << s.epsilon;
    EXPECT_LE(steps.back().max_dist_to_K0, steps.front().max_dist_to_K0);
}

TEST(Uniqueness, HomogeneousProblem) {
    const auto spec = spec_1d(0.5, constant(0), constant(0));
    const auto d = build_grid(spec, 2.0, 41);
    const auto r = uniqueness_probe(spec, d, SolverConfig{},
                                    {InitSpec::zero(), InitSpec::exterior_min(), InitSpec::randomized(42)});
    EXPECT_TRUE(r.asserted);
    EXPECT_LE(r.max_deviation, 1e-9);
    EXPECT_TRUE(r.passed);
}

TEST(Uniqueness, ThreeInitsAgree) {
    const auto& b = bump();
    const auto r = uniqueness_probe(b.spec, b.d, b.cfg,
                                    {InitSpec::zero(), InitSpec::exterior_min(), InitSpec::randomized(42)});
    EXPECT_EQ(r.runs.size(), 3u);
    EXPECT_LE(r.max_deviation, 1e-7);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.runs[2].init, "random:42");
}

TEST(Uniqueness, SignChangingProbeIsReportedOnly) {
    auto spec = spec_1d(0.5, [](const Point& p) { return p[0] < 0 ? -1.0 : (p[0] > 0 ? 1.0 : 0.0); },
                        constant(0));
    spec.strict_sign_check = false;
    const auto d = build_grid(spec, 2.0, 81);
    const auto r = uniqueness_probe(spec, d, SolverConfig{},
                                    {InitSpec::zero(), InitSpec::randomized(1), InitSpec::randomized(2)});
    EXPECT_FALSE(r.asserted);
    EXPECT_TRUE(r.passed);
    EXPECT_TRUE(std::isfinite(r.max_deviation));
}

TEST(Uniqueness, NeedsTwoInits) {
    const auto& b = bump();
    EXPECT_THROW(uniqueness_probe(b.spec, b.d, b.cfg, {InitSpec::zero()}), Error);
}

TEST(RandomField, SeedsAreReproducible) {
    const auto a = random_field(100, 42, -1, 1), b = random_field(100, 42, -1, 1);
    EXPECT_EQ(a.values, b.values);
    const auto c = random_field(100, 43, -1, 1);
    EXPECT_NE(a.values, c.values);
    for (double v : a.values) {
        EXPECT_GE(v, -1.0);
        EXPECT_LT(v, 1.0);
    }
}
