#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nilap/error.hpp"
#include "nilap/grid_domain.hpp"
#include "nilap/solver.hpp"

namespace nilap {

using json = nlohmann::json;

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> names = {
        "maxprinciple", "attainment", "comparison", "perturbation",
        "uniqueness",   "infconv",    "truncation"};
    return names;
}

/// Parameters of the verification suites that are not part of the problem.
struct VerificationParams {
    std::vector<double> epsilons{0.2, 0.1, 0.05};
    double slack_per_h = 1.0;
    double tie_tol = 1e-9;
    double comparison_epsilon = 0.05;
};

struct Scenario {
    std::string name;
    ProblemSpec spec;
    double box_halfwidth = 2.0;
    std::size_t nodes_per_axis = 101;
    SolverConfig solver;
    std::vector<std::string> suites;
    std::vector<std::uint64_t> seeds{42};
    VerificationParams verification;
    /// The f, g and omega blocks as written, echoed into reports.
    json source;
};

namespace detail {

inline std::size_t node_index_of(const Point& p, int dim, double box, std::size_t n) {
    const double h = 2.0 * box / static_cast<double>(n - 1);
    auto idx = [&](double c) {
        const long k = std::lround((c + box) / h);
        return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(n) - 1));
    };
    return dim == 1 ? idx(p[0]) : idx(p[0]) * n + idx(p[1]);
}

[[noreturn]] inline void invalid(const std::string& field, const std::string& why) {
    throw Error(Errc::ValidationError, field + ": " + why);
}

inline double number(const json& j, const std::string& key, const std::string& field) {
    if (!j.contains(key)) invalid(field + "." + key, "missing");
    if (!j.at(key).is_number()) invalid(field + "." + key, "must be a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) invalid(field + "." + key, "must be finite");
    return v;
}

inline double number_or(const json& j, const std::string& key, double fallback,
                        const std::string& field) {
    return j.contains(key) ? number(j, key, field) : fallback;
}

inline std::vector<double> number_list(const json& j, const std::string& key,
                                       const std::string& field) {
    if (!j.contains(key) || !j.at(key).is_array()) invalid(field + "." + key, "must be an array");
    std::vector<double> out;
    for (const auto& e : j.at(key)) {
        if (!e.is_number()) invalid(field + "." + key, "entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

/// Scalar function from its JSON description:
///   constant         {"value": c}
///   affine           {"value": c, "gradient": [a, b]}            c + a x + b y
///   radial_quadratic {"c0": a, "c2": b}                          a + b |x|^2
///   sign_split       {"left": a, "right": b, "center": c}        by the sign of x
///   table            {"values": [...]}                            one per node
///                    ("expression-table" is accepted as an alias)
inline ScalarFunction parse_function(const json& j, const std::string& field, int dim, double box,
                                     std::size_t n) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        invalid(field, "must be an object with a string \"type\"");
    const auto type = j.at("type").get<std::string>();
    if (type == "constant") {
        const double c = number(j, "value", field);
        return [c](const Point&) { return c; };
    }
    if (type == "affine") {
        const double c = number_or(j, "value", 0.0, field);
        auto grad = number_list(j, "gradient", field);
        if (static_cast<int>(grad.size()) != dim) invalid(field + ".gradient", "length must equal dim");
        grad.resize(2, 0.0);
        return [c, grad](const Point& p) { return c + grad[0] * p[0] + grad[1] * p[1]; };
    }
    if (type == "radial_quadratic") {
        const double c0 = number(j, "c0", field), c2 = number(j, "c2", field);
        return [c0, c2](const Point& p) { return c0 + c2 * (p[0] * p[0] + p[1] * p[1]); };
    }
    if (type == "sign_split") {
        const double l = number(j, "left", field), r = number(j, "right", field);
        const double c = number_or(j, "center", 0.5 * (l + r), field);
        return [l, r, c](const Point& p) { return p[0] < 0.0 ? l : (p[0] > 0.0 ? r : c); };
    }
    if (type == "table" || type == "expression-table") {
        auto values = number_list(j, "values", field);
        const std::size_t total = dim == 1 ? n : n * n;
        if (values.size() != total)
            invalid(field + ".values", "needs one entry per grid node (" + std::to_string(total) + ")");
        return [values = std::move(values), dim, box, n](const Point& p) {
            return values[node_index_of(p, dim, box, n)];
        };
    }
    invalid(field + ".type", "unknown function type '" + type + "'");
}

/// Omega from its JSON description:
///   interval {"lo": a, "hi": b}              1D, open
///   disk     {"center": [..], "radius": r}   open ball
///   bitmap   {"values": [0|1, ...]}          one per node
inline Mask parse_omega(const json& j, int dim, double box, std::size_t n) {
    const std::string field = "omega";
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        invalid(field, "must be an object with a string \"type\"");
    const auto type = j.at("type").get<std::string>();
    if (type == "interval") {
        if (dim != 1) invalid(field, "interval requires dim = 1");
        const double lo = number(j, "lo", field), hi = number(j, "hi", field);
        if (!(lo < hi)) invalid(field, "interval needs lo < hi");
        return [lo, hi](const Point& p) { return p[0] > lo && p[0] < hi; };
    }
    if (type == "disk") {
        auto c = number_list(j, "center", field);
        if (static_cast<int>(c.size()) != dim) invalid(field + ".center", "length must equal dim");
        c.resize(2, 0.0);
        const double r = number(j, "radius", field);
        if (!(r > 0.0)) invalid(field + ".radius", "must be positive");
        const Point center{c[0], c[1]};
        return [center, r](const Point& p) { return distance(p, center) < r; };
    }
    if (type == "bitmap") {
        auto values = number_list(j, "values", field);
        const std::size_t total = dim == 1 ? n : n * n;
        if (values.size() != total)
            invalid(field + ".values", "needs one entry per grid node (" + std::to_string(total) + ")");
        return [values = std::move(values), dim, box, n](const Point& p) {
            return values[node_index_of(p, dim, box, n)] != 0.0;
        };
    }
    invalid(field + ".type", "unknown omega type '" + type + "'");
}

inline std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace detail

inline SolverConfig parse_solver(const json& j) {
    SolverConfig cfg;
    if (j.is_null()) return cfg;
    if (!j.is_object()) detail::invalid("solver", "must be an object");
    const std::string field = "solver";
    cfg.tol_residual = detail::number_or(j, "tol_residual", cfg.tol_residual, field);
    cfg.tol_update = detail::number_or(j, "tol_update", cfg.tol_update, field);
    cfg.point_tol = detail::number_or(j, "point_tol", cfg.point_tol, field);
    cfg.max_sweeps = static_cast<int>(detail::number_or(j, "max_sweeps", cfg.max_sweeps, field));
    cfg.point_max_iter = static_cast<int>(detail::number_or(j, "point_max_iter", cfg.point_max_iter, field));
    if (j.contains("sweep_mode")) {
        const auto m = j.at("sweep_mode").get<std::string>();
        if (m == "gauss_seidel") cfg.sweep_mode = SweepMode::GaussSeidel;
        else if (m == "jacobi") cfg.sweep_mode = SweepMode::Jacobi;
        else detail::invalid("solver.sweep_mode", "must be gauss_seidel or jacobi");
    }
    if (j.contains("init")) {
        const auto m = j.at("init").get<std::string>();
        if (m == "zero") cfg.init = InitKind::ConstantZero;
        else if (m == "exterior_min") cfg.init = InitKind::ExteriorMin;
        else detail::invalid("solver.init", "must be zero or exterior_min");
    }
    try {
        cfg.validate();
    } catch (const Error& e) {
        detail::invalid("solver", e.what());
    }
    return cfg;
}

/// Builds and validates a Scenario from parsed JSON. `allow_sign_change`
/// overrides the file's probe flag when true.
inline Scenario scenario_from_json(const json& j, const std::string& fallback_name,
                                   bool allow_sign_change = false) {
    using detail::invalid;
    using detail::number;
    if (!j.is_object()) invalid("scenario", "top level must be an object");
    Scenario s;
    s.name = j.value("name", fallback_name);
    if (s.name.empty()) invalid("name", "must not be empty");

    const double dim_raw = number(j, "dim", "scenario");
    if (dim_raw != 1.0 && dim_raw != 2.0) invalid("dim", "must be 1 or 2");
    s.spec.dim = static_cast<int>(dim_raw);
    s.box_halfwidth = number(j, "box_halfwidth", "scenario");
    if (!(s.box_halfwidth > 0.0)) invalid("box_halfwidth", "must be positive");
    const double n_raw = number(j, "nodes_per_axis", "scenario");
    if (n_raw < 3 || std::floor(n_raw) != n_raw || static_cast<long>(n_raw) % 2 == 0)
        invalid("nodes_per_axis", "must be an odd integer >= 3");
    s.nodes_per_axis = static_cast<std::size_t>(n_raw);

    s.spec.alpha = number(j, "alpha", "scenario");
    if (!(s.spec.alpha > 0.0 && s.spec.alpha < 1.0))
        invalid("alpha", "alpha must satisfy 0 < alpha < 1");
    s.spec.tail_value = detail::number_or(j, "tail_value", 0.0, "scenario");
    s.spec.strict_sign_check = !(allow_sign_change || j.value("probe_allow_sign_change", false));

    if (!j.contains("omega")) invalid("omega", "missing");
    if (!j.contains("f")) invalid("f", "missing");
    if (!j.contains("g")) invalid("g", "missing");
    s.spec.omega = detail::parse_omega(j.at("omega"), s.spec.dim, s.box_halfwidth, s.nodes_per_axis);
    s.spec.rhs = detail::parse_function(j.at("f"), "f", s.spec.dim, s.box_halfwidth, s.nodes_per_axis);
    s.spec.exterior = detail::parse_function(j.at("g"), "g", s.spec.dim, s.box_halfwidth, s.nodes_per_axis);
    s.solver = parse_solver(j.contains("solver") ? j.at("solver") : json());

    if (j.contains("suites")) {
        for (const auto& e : j.at("suites")) {
            const auto name = e.get<std::string>();
            if (name == "all") {
                s.suites = known_suites();
                break;
            }
            if (std::find(known_suites().begin(), known_suites().end(), name) == known_suites().end())
                invalid("suites", "unknown suite '" + name + "'");
            s.suites.push_back(name);
        }
    } else {
        s.suites = known_suites();
    }
    if (j.contains("seeds")) {
        s.seeds.clear();
        for (const auto& e : j.at("seeds")) {
            if (!e.is_number_unsigned()) invalid("seeds", "entries must be non-negative integers");
            s.seeds.push_back(e.get<std::uint64_t>());
        }
    }
    if (j.contains("verification")) {
        const auto& v = j.at("verification");
        if (v.contains("epsilons")) s.verification.epsilons = detail::number_list(v, "epsilons", "verification");
        s.verification.slack_per_h = detail::number_or(v, "slack_per_h", s.verification.slack_per_h, "verification");
        s.verification.tie_tol = detail::number_or(v, "tie_tol", s.verification.tie_tol, "verification");
        s.verification.comparison_epsilon =
            detail::number_or(v, "comparison_epsilon", s.verification.comparison_epsilon, "verification");
        for (double e : s.verification.epsilons)
            if (!(e > 0.0)) invalid("verification.epsilons", "must be positive");
    }
    s.source = {{"omega", j.at("omega")}, {"f", j.at("f")}, {"g", j.at("g")}};

    // Build the grid once here so mask and sign problems surface at load time.
    GridDomain domain = [&] {
        try {
            return build_grid(s.spec, s.box_halfwidth, s.nodes_per_axis);
        } catch (const Error& e) {
            invalid("omega", e.what());
        }
    }();
    try {
        (void)sample_rhs(s.spec, domain);
        (void)exterior_field(s.spec, domain);
    } catch (const Error& e) {
        if (e.code() == Errc::SignHypothesis)
            invalid("f", "f <= 0 is bounded and continuous is required unless "
                         "--probe-allow-sign-change is given");
        invalid("f/g", e.what());
    }
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path, bool allow_sign_change = false) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, path.string() + ":" +
                                          std::to_string(detail::line_of_offset(text, e.byte)) +
                                          ": " + e.what());
    }
    try {
        return scenario_from_json(j, path.stem().string(), allow_sign_change);
    } catch (const json::exception& e) {
        throw Error(Errc::ValidationError, path.string() + ": " + e.what());
    }
}

inline GridDomain scenario_domain(const Scenario& s) {
    return build_grid(s.spec, s.box_halfwidth, s.nodes_per_axis);
}

}  // namespace nilap
