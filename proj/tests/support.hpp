#pragma once

#include <cstdint>
#include <random>

#include "nilap/grid_domain.hpp"
#include "nilap/nonlocal_operator.hpp"

namespace testing_support {

using namespace nilap;

inline Mask interval(double lo, double hi) {
    return [lo, hi](const Point& p) { return p[0] > lo && p[0] < hi; };
}

inline Mask unit_disk() {
    return [](const Point& p) { return p[0] * p[0] + p[1] * p[1] < 1.0; };
}

inline ScalarFunction constant(double c) {
    return [c](const Point&) { return c; };
}

inline ProblemSpec spec_1d(double alpha, ScalarFunction f, ScalarFunction g, double tail = 0.0) {
    ProblemSpec s;
    s.dim = 1;
    s.alpha = alpha;
    s.omega = interval(-1.0, 1.0);
    s.rhs = std::move(f);
    s.exterior = std::move(g);
    s.tail_value = tail;
    return s;
}

inline ProblemSpec spec_2d(double alpha, ScalarFunction f, ScalarFunction g, double tail = 0.0) {
    ProblemSpec s = spec_1d(alpha, std::move(f), std::move(g), tail);
    s.dim = 2;
    s.omega = unit_disk();
    return s;
}

/// Small deterministic generator for property tests.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng() % n); }
    Field field(std::size_t n, double lo, double hi) {
        Field u(n, 0.0, uniform(lo, hi));
        for (auto& v : u.values) v = uniform(lo, hi);
        return u;
    }
};

}  // namespace testing_support
