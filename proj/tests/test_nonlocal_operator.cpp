#include <gtest/gtest.h>

#include <cmath>

#include "nilap/nonlocal_operator.hpp"
#include "oracles/brute_operator.hpp"
#include "support.hpp"

using namespace nilap;
using namespace testing_support;

namespace {

GridDomain three_node_line() {
    // Box [-1, 1] with nodes {-1, 0, 1}; only the origin is Interior.
    return build_grid(interval(-0.5, 0.5), 1, 1.0, 3);
}

}  // namespace

TEST(Quotient, ConstantFieldGivesZero) {
    const auto d = build_grid(interval(-1, 1), 1, 2.0, 9);
    const NonlocalOperator op(d, 0.5);
    const Field u(d.size(), 7.0, 7.0);
    for (NodeId x = 0; x < d.size(); ++x)
        for (NodeId y = 0; y < d.size(); ++y)
            if (x != y) EXPECT_EQ(op.quotient(u, x, y), 0.0);
}

TEST(Quotient, DirectArithmetic) {
    const auto d = three_node_line();
    const NonlocalOperator op(d, 0.5);
    const Field u({0.0, 1.0, 0.0}, 0.0);
    EXPECT_DOUBLE_EQ(op.quotient(u, 1, 0), -1.0);
}

TEST(Quotient, TailIsZeroAndSamePointThrows) {
    const auto d = three_node_line();
    const NonlocalOperator op(d, 0.5);
    const Field u({3.0, -4.0, 5.0}, 100.0);
    EXPECT_EQ(op.quotient(u, 1, kTail), 0.0);
    try {
        op.quotient(u, 1, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SamePoint);
    }
}

TEST(Evaluate, ConstantField) {
    const auto d = build_grid(unit_disk(), 2, 2.0, 9);
    const NonlocalOperator op(d, 0.3);
    const Field u(d.size(), -2.5, -2.5);
    for (NodeId x = 0; x < d.size(); ++x) {
        const auto e = op.evaluate(u, x);
        EXPECT_EQ(e.l_minus, 0.0);
        EXPECT_EQ(e.l_plus, 0.0);
        EXPECT_EQ(e.l_inf, 0.0);
    }
}

TEST(Evaluate, ThreeCandidateBump) {
    const auto d = three_node_line();
    const NonlocalOperator op(d, 0.5);
    const Field u({0.0, 1.0, 0.0}, 0.0);
    const auto e = op.evaluate(u, 1);
    EXPECT_DOUBLE_EQ(e.l_minus, -1.0);
    EXPECT_EQ(e.argmin, 0u);  // first of the two tied nodes
    EXPECT_EQ(e.l_plus, 0.0);
    EXPECT_EQ(e.argmax, kTail);
    EXPECT_DOUBLE_EQ(e.l_inf, -1.0);
}

TEST(Evaluate, LInfIsExactSum) {
    const auto d = build_grid(unit_disk(), 2, 2.0, 11);
    const NonlocalOperator op(d, 0.7);
    Gen gen(5);
    const Field u = gen.field(d.size(), -3, 3);
    for (NodeId x = 0; x < d.size(); ++x) {
        const auto e = op.evaluate(u, x);
        EXPECT_EQ(e.l_inf, e.l_minus + e.l_plus);
    }
}

TEST(Evaluate, MatchesBruteForceEnumeration) {
    for (int dim : {1, 2}) {
        const std::size_t n = dim == 1 ? 41 : 13;
        const auto d = build_grid(dim == 1 ? interval(-1, 1) : unit_disk(), dim, 2.0, n);
        const auto pts = oracle::box_points(dim, 2.0, n);
        for (double alpha : {0.3, 0.5, 0.9}) {
            const NonlocalOperator op(d, alpha);
            Gen gen(static_cast<std::uint64_t>(dim * 100 + alpha * 10));
            for (int trial = 0; trial < 5; ++trial) {
                const Field u = gen.field(d.size(), -1, 1);
                for (NodeId x = 0; x < d.size(); ++x) {
                    const auto a = op.evaluate(u, x);
                    const auto b = oracle::enumerate(pts, u.values, x, alpha);
                    EXPECT_NEAR(a.l_minus, b.lo, 1e-12 * std::max(1.0, std::abs(b.lo)));
                    EXPECT_NEAR(a.l_plus, b.hi, 1e-12 * std::max(1.0, std::abs(b.hi)));
                    const NodeId wmin = b.argmin == oracle::Eval::npos ? kTail : b.argmin;
                    const NodeId wmax = b.argmax == oracle::Eval::npos ? kTail : b.argmax;
                    EXPECT_EQ(a.argmin, wmin);
                    EXPECT_EQ(a.argmax, wmax);
                }
            }
        }
    }
}

TEST(Evaluate, ClosureVariantExcludesFarNodesAndTail) {
    const auto d = build_grid(interval(-1, 1), 1, 2.0, 9);  // h = 0.5
    const NonlocalOperator op(d, 0.5);
    Field u(d.size(), 0.0, 50.0);
    u[0] = -100.0;  // x = -2, far from Omega
    u[8] = 100.0;   // x = 2
    const NodeId x = 4;
    const auto g = op.evaluate(u, x, Variant::Global);
    EXPECT_EQ(g.argmin, 0u);
    EXPECT_EQ(g.argmax, 8u);
    const auto c = op.evaluate(u, x, Variant::Closure);
    EXPECT_EQ(c.l_minus, 0.0);
    EXPECT_EQ(c.l_plus, 0.0);
    EXPECT_NE(c.argmin, 0u);
    EXPECT_NE(c.argmin, kTail);
    for (NodeId y = 0; y < d.size(); ++y) {
        const double xc = d.coord(y)[0];
        EXPECT_EQ(d.in_closure(y), xc >= -1.0 && xc <= 1.0) << xc;
    }
}

TEST(Evaluate, ClosureWithoutCandidatesThrows) {
    // Eroding everything away leaves an empty discrete closure.
    const auto d = erode(build_grid(interval(-1, 1), 1, 2.0, 9), 100.0);
    const NonlocalOperator op(d, 0.5);
    const Field u(d.size(), 0.0);
    try {
        op.evaluate(u, 4, Variant::Closure);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoCandidates);
    }
    EXPECT_NO_THROW(op.evaluate(u, 4, Variant::Global));
}

TEST(Cone, SampledValues) {
    const auto d = build_grid(interval(-1, 1), 1, 2.0, 9);
    ConeParams p{{0.0, 0.0}, 1.0, 0.5};
    const auto c = cone_field(p, d);
    EXPECT_EQ(c[4], 0.0);                                // vertex
    EXPECT_DOUBLE_EQ(c[5], std::pow(0.5, 0.5));          // |x - x0| = R/2
    EXPECT_DOUBLE_EQ(c[8], 1.0);                         // saturated
    EXPECT_DOUBLE_EQ(c[6], 1.0);                         // |x - x0| = R
    EXPECT_DOUBLE_EQ(c.tail, 1.0);
    ConeParams q{{0.0, 0.0}, 4.0, 0.5};
    EXPECT_DOUBLE_EQ(cone_field(q, d).tail, 2.0);
}

TEST(Cone, OperatorAtVertex) {
    const auto d = build_grid(interval(-1, 1), 1, 2.0, 41);
    const NodeId x0 = 20;
    for (double R : {1.0, 10.0}) {
        ConeParams p{d.coord(x0), R, 0.5};
        const NonlocalOperator op(d, 0.5);
        const auto e = op.evaluate(cone_field(p, d), x0);
        EXPECT_NEAR(e.l_plus, 1.0, 1e-15);
        EXPECT_EQ(e.l_minus, 0.0);
        EXPECT_EQ(e.argmin, kTail);
        EXPECT_NEAR(e.l_inf, 1.0, 1e-15);
    }
}

TEST(Cone, StrictlySubharmonicAwayFromVertex) {
    const auto d = build_grid(interval(-1, 1), 1, 2.0, 81);
    const NodeId x0 = 40;
    ConeParams p{d.coord(x0), 2.0 * d.box_diameter(), 0.5};
    ASSERT_TRUE(cone_covers_interior(p, d));
    const NonlocalOperator op(d, 0.5);
    const auto c = cone_field(p, d);
    for (NodeId x : d.interior_nodes())
        if (x != x0) EXPECT_LT(op.evaluate(c, x).l_inf, -1e-6) << x;
}

TEST(Barrier, MatchesAtVertexAndUsesExteriorInfimum) {
    const auto d = build_grid(interval(-1, 1), 1, 2.0, 9);  // h = 0.5
    const NonlocalOperator op(d, 0.5);
    const NodeId x0 = 4;  // origin
    Field u(d.size(), 0.0, 0.0);
    u[2] = -1.0;  // exterior node at x = -1, distance 1
    const double L = exterior_lminus(op, u, x0);
    EXPECT_DOUBLE_EQ(L, -1.0);
    ConeParams p{d.coord(x0), d.box_diameter(), 0.5};
    const auto w = barrier_field(u, x0, p, L, d);
    const auto c = cone_field(p, d);
    EXPECT_EQ(w[x0], u[x0]);
    for (NodeId i = 0; i < d.size(); ++i) EXPECT_DOUBLE_EQ(w[i], -c[i]);
    for (NodeId y : d.exterior_nodes()) EXPECT_LE(w[y], u[y]) << y;
    EXPECT_LE(w.tail, u.tail);
}

TEST(Barrier, BelowOnExteriorForRandomData) {
    Gen gen(11);
    const auto d = build_grid(unit_disk(), 2, 2.0, 15);
    const NonlocalOperator op(d, 0.6);
    for (int trial = 0; trial < 20; ++trial) {
        Field u = gen.field(d.size(), -1, 1);
        u.tail = gen.uniform(-1, 1);
        const NodeId x0 = d.interior_nodes()[gen.index(d.interior_nodes().size())];
        const double L = exterior_lminus(op, u, x0);
        if (!(L < 0.0)) continue;
        ConeParams p{d.coord(x0), d.box_diameter(), 0.6};
        const auto w = barrier_field(u, x0, p, L, d);
        EXPECT_EQ(w[x0], u[x0]);
        for (NodeId y : d.exterior_nodes()) EXPECT_LE(w[y], u[y] + 1e-14);
    }
}

TEST(Barrier, NonNegativeInfimumRejected) {
    const auto d = build_grid(interval(-1, 1), 1, 2.0, 9);
    const NonlocalOperator op(d, 0.5);
    const Field u(d.size(), 1.0, 1.0);
    const double L = exterior_lminus(op, u, 4);
    EXPECT_EQ(L, 0.0);
    try {
        barrier_field(u, 4, ConeParams{{0, 0}, 5.0, 0.5}, L, d);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonNegativeLminus);
    }
}
