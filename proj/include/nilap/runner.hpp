#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nilap/error.hpp"
#include "nilap/grid_domain.hpp"
#include "nilap/infimal_convolution.hpp"
#include "nilap/nonlocal_operator.hpp"
#include "nilap/scenario.hpp"
#include "nilap/solver.hpp"
#include "nilap/verification.hpp"

namespace nilap {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Output helpers

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string node_label(NodeId y) { return y == kTail ? "tail" : std::to_string(y); }

inline std::string class_label(const GridDomain& d, NodeId y) {
    return std::string(to_string(classify(d, y)));
}

inline void write_coords_header(std::ostream& os, const GridDomain& d) {
    os << (d.dim() == 1 ? "x" : "x,y");
}

inline void write_coords(std::ostream& os, const GridDomain& d, NodeId i) {
    const Point p = d.coord(i);
    os << fmt_double(p[0]);
    if (d.dim() == 2) os << ',' << fmt_double(p[1]);
}

/// node, coordinates, class, u, residual (L u - f on Interior, empty outside).
/// The last row holds the tail value.
inline void write_solution_csv(std::ostream& os, const NonlocalOperator& op, const Field& u,
                               const std::vector<double>& f) {
    const auto& d = op.domain();
    os << "node,";
    write_coords_header(os, d);
    os << ",class,u,residual\n";
    for (NodeId i = 0; i < d.size(); ++i) {
        os << i << ',';
        write_coords(os, d, i);
        os << ',' << class_label(d, i) << ',' << fmt_double(u[i]) << ',';
        if (d.is_interior(i)) os << fmt_double(op.evaluate(u, i).l_inf - f[i]);
        os << '\n';
    }
    os << "tail," << (d.dim() == 1 ? "" : ",") << ",tail," << fmt_double(u.tail) << ",\n";
}

inline void write_operator_csv(std::ostream& os, const NonlocalOperator& op, const Field& u) {
    os << "node,l_minus,l_plus,l_inf,argmin,argmax\n";
    for (NodeId i = 0; i < op.domain().size(); ++i) {
        const auto e = op.evaluate(u, i);
        os << i << ',' << fmt_double(e.l_minus) << ',' << fmt_double(e.l_plus) << ','
           << fmt_double(e.l_inf) << ',' << node_label(e.argmin) << ',' << node_label(e.argmax)
           << '\n';
    }
}

// ---------------------------------------------------------------------------
// Scenario variants

/// Data variants that dominate the scenario's data in the comparison order:
/// f' >= f, g' <= g, C1' <= C1. Their solutions are subsolutions for the
/// original problem and must lie below its solution.
inline std::vector<std::pair<std::string, ProblemSpec>> dominated_variants(const ProblemSpec& spec) {
    std::vector<std::pair<std::string, ProblemSpec>> out;
    auto half_f = [rhs = spec.rhs](const Point& p) { return 0.5 * rhs(p); };
    auto lower_g = [ext = spec.exterior](const Point& p) { return ext(p) - 0.25; };

    ProblemSpec a = spec;
    a.rhs = half_f;
    out.emplace_back("half_f", a);

    ProblemSpec b = spec;
    b.exterior = lower_g;
    b.tail_value = spec.tail_value - 0.25;
    out.emplace_back("lower_g", b);

    ProblemSpec c = spec;
    c.tail_value = spec.tail_value - 0.1;
    out.emplace_back("lower_tail", c);

    ProblemSpec d = spec;
    d.rhs = [](const Point&) { return 0.0; };
    d.exterior = lower_g;
    d.tail_value = spec.tail_value - 0.5;
    out.emplace_back("zero_f_lower_g", d);
    return out;
}

struct PlantedPair {
    Field v;
    double epsilon = 0.0;
    PerturbationParams params;
    NodeId center = 0;
};

/// v = u + height * (1 - |x - c|^2 / rho^2)_+ on Omega, centred at the
/// Interior node farthest from the exterior. Epsilon and tau are chosen so the
/// r(eps) collar and the cutoff band stay away from the bump.
inline PlantedPair planted_violation(const GridDomain& domain, const Field& u, double height = 1.0) {
    const auto dist = domain.distance_to_exterior();
    PlantedPair p;
    double dmax = -1.0;
    for (NodeId x : domain.interior_nodes())
        if (dist[x] > dmax) { dmax = dist[x]; p.center = x; }
    const double rho = 0.5 * dmax;
    p.v = u;
    const Point c = domain.coord(p.center);
    for (NodeId x : domain.interior_nodes()) {
        const double r = distance(domain.coord(x), c);
        p.v[x] += height * std::max(0.0, 1.0 - (r * r) / (rho * rho));
    }
    p.params.tau = 0.4 * dmax;
    p.params.beta_nbhd = 0.25 * dmax;
    const double L = normalization(u, domain).L_bound;
    const double r_target = 0.5 * p.params.tau;
    p.epsilon = L > 0.0 ? std::min(0.01, r_target * r_target / (2.0 * L)) : 0.01;
    return p;
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteContext {
    const Scenario& scenario;
    const GridDomain& domain;
    const NonlocalOperator& op;
    const std::vector<double>& f;
    const SolveResult& solution;
    bool f_nonpositive = true;
};

inline ojson check_entry(const std::string& suite, const std::string& check, bool gated, bool ok,
                         ojson details = ojson::object(), const char* status_override = nullptr) {
    ojson j;
    j["suite"] = suite;
    j["check"] = check;
    j["gated"] = gated;
    j["status"] = status_override ? status_override : (gated ? (ok ? "pass" : "fail") : "reported");
    j["details"] = std::move(details);
    return j;
}

inline ojson witness_list(const std::vector<NodeId>& nodes, std::size_t cap = 32) {
    ojson a = ojson::array();
    for (std::size_t k = 0; k < nodes.size() && k < cap; ++k) a.push_back(node_label(nodes[k]));
    return a;
}

inline void suite_maxprinciple(const SuiteContext& c, ojson& checks) {
    const auto r = check_strong_max(c.op, c.solution.u, c.f, c.scenario.solver.tol_residual,
                                    c.scenario.verification.tie_tol);
    ojson d{{"result", to_string(r.status)},
            {"supersolution_excess", r.supersolution_excess},
            {"min_interior", r.min_interior},
            {"min_interior_node", node_label(r.min_interior_node)},
            {"min_outside", r.min_outside},
            {"min_outside_node", node_label(r.min_outside_node)},
            {"constant", r.constant},
            {"violations", witness_list(r.violations)}};
    checks.push_back(check_entry("maxprinciple", "strong_maximum_principle", c.f_nonpositive,
                                 r.passed(), std::move(d)));
}

inline void suite_attainment(const SuiteContext& c, ojson& checks) {
    const auto r = check_attainment(c.op, c.solution.u, c.f, c.scenario.solver.tol_residual,
                                    c.scenario.verification.tie_tol);
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t by_class[3] = {0, 0, 0};
    for (const auto& e : r.entries) {
        min_margin = std::min(min_margin, e.margin);
        ++by_class[static_cast<int>(e.witness)];
    }
    ojson d{{"result", to_string(r.status)},
            {"nodes", r.entries.size()},
            {"min_margin", fmt_double(min_margin)},
            {"witness_interior", by_class[0]},
            {"witness_exterior", by_class[1]},
            {"witness_tail", by_class[2]},
            {"violations", witness_list(r.violations)}};
    checks.push_back(check_entry("attainment", "infimum_attained_outside", c.f_nonpositive,
                                 r.passed(), std::move(d)));
}

inline void suite_comparison(const SuiteContext& c, ojson& checks) {
    const double tol = 10.0 * c.scenario.solver.tol_residual;
    for (const auto& [label, variant] : dominated_variants(c.scenario.spec)) {
        try {
            const auto v = solve(variant, c.domain, c.scenario.solver);
            const auto r = run_comparison(c.domain, c.solution.u, v.u, tol,
                                          c.scenario.verification.comparison_epsilon,
                                          c.scenario.verification.tie_tol);
            ojson d{{"variant", label},
                    {"M", r.M},
                    {"M_eps", r.M_eps},
                    {"K0_size", r.K0.size()},
                    {"K0", witness_list(r.K0, 8)},
                    {"max_interior_excess", r.max_excess},
                    {"tolerance", tol},
                    {"violations", witness_list(r.violation_nodes)}};
            checks.push_back(check_entry("comparison", "dominated_" + label, c.f_nonpositive,
                                         r.passed, std::move(d)));
        } catch (const Error& e) {
            checks.push_back(check_entry("comparison", "dominated_" + label, true, false,
                                         ojson{{"error", e.what()}}));
        }
    }
}

inline ojson perturbation_details(const PerturbationReport& r) {
    ojson entries = ojson::array();
    for (const auto& g : r.entries)
        entries.push_back({{"node", g.node},
                           {"gap", g.gap},
                           {"lplus_drop", g.lplus_phi - g.lplus_phi_tilde},
                           {"lminus_drop", g.lminus_phi - g.lminus_phi_tilde},
                           {"delta_at_witness", g.delta_proof},
                           {"lminus_witness", node_label(g.lminus_witness)},
                           {"dist_to_K0", g.dist_to_K0}});
    return {{"vacuous", r.vacuous},
            {"applicable", r.applicable},
            {"epsilon", r.epsilon},
            {"r_eps", r.r_eps},
            {"tau", r.tau},
            {"M", r.M},
            {"M_eps", r.M_eps},
            {"delta", r.delta},
            {"K_eps_in_omega_tau", r.K_eps_in_omega_tau},
            {"K_eps_localized", r.K_eps_localized},
            {"min_gap_margin", fmt_double(r.min_gap_margin)},
            {"entries", std::move(entries)}};
}

inline void suite_perturbation(const SuiteContext& c, ojson& checks) {
    // Converged pair from dominated data: nothing to dissect.
    try {
        const auto variants = dominated_variants(c.scenario.spec);
        const auto v = solve(variants.back().second, c.domain, c.scenario.solver);
        const auto planted = planted_violation(c.domain, c.solution.u);
        const auto r = perturbation_gap_experiment(c.op, c.solution.u, v.u, planted.epsilon,
                                                   planted.params, c.scenario.verification.tie_tol);
        checks.push_back(check_entry("perturbation", "converged_pair", c.f_nonpositive,
                                     r.vacuous, perturbation_details(r),
                                     r.vacuous ? "vacuous" : nullptr));
    } catch (const Error& e) {
        checks.push_back(check_entry("perturbation", "converged_pair", true, false,
                                     ojson{{"error", e.what()}}));
    }

    const auto planted = planted_violation(c.domain, c.solution.u);
    const auto r = perturbation_gap_experiment(c.op, c.solution.u, planted.v, planted.epsilon,
                                               planted.params, c.scenario.verification.tie_tol);
    // The drop bound needs the L- witness of u_eps outside Omega, which
    // attainment only guarantees when f <= 0.
    checks.push_back(check_entry("perturbation", "planted_violation_gap", c.f_nonpositive,
                                 r.passed && !r.vacuous, perturbation_details(r)));

    // K_eps localisation as eps shrinks, reported only.
    ojson loc = ojson::array();
    const auto steps = keps_localization(c.domain, c.solution.u, planted.v,
                                         {4.0 * planted.epsilon, 2.0 * planted.epsilon, planted.epsilon},
                                         planted.params.beta_nbhd, c.scenario.verification.tie_tol);
    for (const auto& st : steps)
        loc.push_back({{"epsilon", st.epsilon}, {"max_dist_to_K0", st.max_dist_to_K0},
                       {"localized", st.localized}});
    checks.push_back(check_entry("perturbation", "K_eps_localization", false, true,
                                 ojson{{"beta_nbhd", planted.params.beta_nbhd}, {"trend", loc}}));
}

inline void suite_uniqueness(const SuiteContext& c, ojson& checks) {
    std::vector<InitSpec> inits{InitSpec::zero(), InitSpec::exterior_min()};
    for (auto seed : c.scenario.seeds) inits.push_back(InitSpec::randomized(seed));
    try {
        const auto r = uniqueness_probe(c.scenario.spec, c.domain, c.scenario.solver, inits);
        ojson runs = ojson::array();
        for (const auto& run : r.runs)
            runs.push_back({{"init", run.init},
                            {"sweeps", run.result.sweeps_used},
                            {"residual", run.result.residual_max}});
        checks.push_back(check_entry("uniqueness", "multi_init_agreement", r.asserted, r.passed,
                                     ojson{{"max_deviation", r.max_deviation},
                                           {"threshold", r.threshold},
                                           {"runs", std::move(runs)}}));
    } catch (const Error& e) {
        checks.push_back(check_entry("uniqueness", "multi_init_agreement", c.f_nonpositive, false,
                                     ojson{{"error", e.what()}}));
    }
}

/// Facts about u_eps used by the comparison argument, for one epsilon.
struct InfconvFacts {
    double epsilon = 0.0;
    bool below = true;               ///< u_eps <= u exactly
    double max_argmin_excess = 0.0;  ///< max of |x - x*| - (sqrt(2 L eps) + h)
    double max_convexity = 0.0;      ///< largest second difference of u_eps - |x|^2/(2 eps)
    ShiftCheckReport shift;
    InfConvResult ic;
};

/// L here is the oscillation of u over all nodes, which bounds |x - x*| at
/// Exterior nodes as well as Interior ones.
inline InfconvFacts infconv_facts(const Field& u, const ProblemSpec& spec, const GridDomain& domain,
                                  double epsilon, const SolverConfig& cfg, double slack_per_h) {
    InfconvFacts r;
    r.epsilon = epsilon;
    const auto norm = normalization(u, domain);
    const Field un = shifted(u, -norm.shift);
    const double L_all = *std::max_element(un.values.begin(), un.values.end());
    r.ic = inf_convolve(un, epsilon, domain, norm.L_bound);
    const double bound = std::sqrt(2.0 * L_all * epsilon) + domain.spacing();
    r.max_argmin_excess = -std::numeric_limits<double>::infinity();
    for (NodeId x = 0; x < domain.size(); ++x) {
        r.below = r.below && r.ic.u_eps[x] <= un[x];
        r.max_argmin_excess =
            std::max(r.max_argmin_excess, domain.node_distance(x, r.ic.argmin[x]) - bound);
    }
    r.max_convexity = max_line_convexity(r.ic, domain);
    r.shift = check_supersolution_shift(u, spec, domain, epsilon, cfg, slack_per_h);
    return r;
}

inline void suite_infconv(const SuiteContext& c, ojson& checks) {
    auto eps = c.scenario.verification.epsilons;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    std::vector<InfconvFacts> facts;
    for (double e : eps)
        facts.push_back(infconv_facts(c.solution.u, c.scenario.spec, c.domain, e, c.scenario.solver,
                                      c.scenario.verification.slack_per_h));
    bool monotone = true;
    for (std::size_t k = 1; k < facts.size(); ++k)
        for (NodeId x = 0; x < c.domain.size(); ++x)
            monotone = monotone && facts[k].ic.u_eps[x] >= facts[k - 1].ic.u_eps[x];
    checks.push_back(check_entry("infconv", "monotone_in_epsilon", true, monotone));
    for (const auto& fct : facts) {
        const std::string tag = "eps=" + fmt_double(fct.epsilon);
        checks.push_back(check_entry("infconv", "below_u " + tag, true, fct.below));
        checks.push_back(check_entry("infconv", "argmin_distance " + tag, true,
                                     fct.max_argmin_excess <= 0.0,
                                     ojson{{"max_excess_over_bound", fct.max_argmin_excess}}));
        checks.push_back(check_entry("infconv", "line_concavity " + tag, true,
                                     fct.max_convexity <= 1e-12,
                                     ojson{{"max_second_difference", fct.max_convexity}}));
        checks.push_back(check_entry("infconv", "shifted_supersolution " + tag, c.f_nonpositive,
                                     fct.shift.passed,
                                     ojson{{"r_eps", fct.shift.r_eps},
                                           {"eroded_nodes", fct.shift.nodes.size()},
                                           {"slack", fct.shift.slack},
                                           {"max_excess", fmt_double(fct.shift.max_excess)},
                                           {"max_violation", fct.shift.max_violation}}));
    }
}

inline void suite_truncation(const SuiteContext& c, ojson& checks) {
    const Field& u = c.solution.u;
    const auto [mn, mx] = std::minmax_element(u.values.begin(), u.values.end());
    Field raised = u;
    const double lift = 2.0 * (*mx - *mn) + 1.0;
    for (NodeId x : c.domain.interior_nodes()) raised[x] += lift;
    const double tol = c.scenario.solver.tol_residual;
    for (const auto& [label, field] : {std::pair<std::string, const Field*>{"solution", &u},
                                       std::pair<std::string, const Field*>{"raised", &raised}}) {
        try {
            const auto r = truncate_supersolution(c.op, *field, c.f, tol);
            const bool ordered = r.K_exact <= r.K_pairwise + 1e-12 && r.K_pairwise <= r.K + 1e-12;
            bool idempotent = true;
            for (NodeId x : c.domain.interior_nodes())
                idempotent = idempotent && ((*field)[x] > r.K || r.u_tilde[x] == (*field)[x]);
            checks.push_back(check_entry("truncation", "truncate_" + label, c.f_nonpositive,
                                         r.supersolution_preserved && ordered && idempotent,
                                         ojson{{"K", r.K},
                                               {"K_pairwise", r.K_pairwise},
                                               {"K_exact", r.K_exact},
                                               {"truncated_nodes", r.truncated},
                                               {"residual_excess", r.residual_excess}}));
        } catch (const Error& e) {
            checks.push_back(check_entry("truncation", "truncate_" + label, true, false,
                                         ojson{{"error", e.what()}}));
        }
    }
}

/// Runs the named suites against a solved scenario. Returns the report with a
/// top-level "passed" flag that is false iff some gated check failed.
inline ojson run_suites(const Scenario& s, const GridDomain& domain, const SolveResult& solution,
                        const std::vector<std::string>& suites) {
    const NonlocalOperator op(domain, s.spec.alpha);
    ProblemSpec relaxed = s.spec;
    relaxed.strict_sign_check = false;
    const auto f = sample_rhs(relaxed, domain);
    SuiteContext c{s, domain, op, f, solution, true};
    for (NodeId x : domain.interior_nodes()) c.f_nonpositive = c.f_nonpositive && f[x] <= 0.0;

    ojson checks = ojson::array();
    for (const auto& name : suites) {
        if (name == "maxprinciple") suite_maxprinciple(c, checks);
        else if (name == "attainment") suite_attainment(c, checks);
        else if (name == "comparison") suite_comparison(c, checks);
        else if (name == "perturbation") suite_perturbation(c, checks);
        else if (name == "uniqueness") suite_uniqueness(c, checks);
        else if (name == "infconv") suite_infconv(c, checks);
        else if (name == "truncation") suite_truncation(c, checks);
        else throw Error(Errc::ValidationError, "unknown suite '" + name + "'");
    }
    bool passed = true;
    for (const auto& chk : checks)
        if (chk["gated"].get<bool>() && chk["status"] == "fail") passed = false;
    ojson rep;
    rep["scenario"] = s.name;
    rep["f_nonpositive"] = c.f_nonpositive;
    rep["converged"] = solution.converged;
    rep["residual_max"] = solution.residual_max;
    rep["sweeps_used"] = solution.sweeps_used;
    rep["checks"] = std::move(checks);
    rep["passed"] = passed && solution.converged;
    return rep;
}

// ---------------------------------------------------------------------------
// Corpus

struct CorpusRow {
    std::string scenario;
    bool converged = false;
    double residual = std::numeric_limits<double>::quiet_NaN();
    int sweeps = 0;
    std::vector<std::pair<std::string, bool>> suites;  ///< suite -> all gated checks passed
    std::string error;
    bool passed = false;
};

struct CorpusSummary {
    std::vector<CorpusRow> rows;
    bool all_passed() const {
        return std::all_of(rows.begin(), rows.end(), [](const CorpusRow& r) { return r.passed; });
    }
};

inline std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error(Errc::EmptyCorpus, dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(Errc::EmptyCorpus, "no scenario files in " + dir.string());
    return files;
}

/// Solves every scenario in `dir`, runs its suites and writes
/// <out>/<name>/{solution.csv,report.json} plus <out>/summary.{csv,json}.
/// Per-scenario failures are recorded, never thrown.
inline CorpusSummary run_corpus(const std::filesystem::path& dir, const std::filesystem::path& out) {
    const auto files = corpus_files(dir);
    std::filesystem::create_directories(out);
    CorpusSummary summary;
    std::vector<std::string> seen;
    for (const auto& file : files) {
        CorpusRow row;
        row.scenario = file.stem().string();
        try {
            const Scenario s = load_scenario(file);
            row.scenario = s.name;
            if (std::find(seen.begin(), seen.end(), s.name) != seen.end())
                throw Error(Errc::ValidationError, "duplicate scenario name '" + s.name + "'");
            seen.push_back(s.name);
            const auto scen_dir = out / s.name;
            std::filesystem::create_directories(scen_dir);
            const GridDomain domain = scenario_domain(s);
            const NonlocalOperator op(domain, s.spec.alpha);
            ProblemSpec relaxed = s.spec;
            relaxed.strict_sign_check = false;
            const auto f = sample_rhs(relaxed, domain);
            SolveResult sol;
            try {
                sol = solve(s.spec, domain, s.solver);
            } catch (const NotConverged& nc) {
                sol = nc.partial();
                row.error = nc.what();
            }
            row.converged = sol.converged;
            row.residual = sol.residual_max;
            row.sweeps = sol.sweeps_used;
            {
                std::ofstream csv(scen_dir / "solution.csv");
                write_solution_csv(csv, op, sol.u, f);
            }
            ojson rep = run_suites(s, domain, sol, s.suites);
            for (const auto& name : s.suites) {
                bool ok = true;
                for (const auto& chk : rep["checks"])
                    if (chk["suite"] == name && chk["gated"].get<bool>() && chk["status"] == "fail")
                        ok = false;
                row.suites.emplace_back(name, ok);
            }
            row.passed = rep["passed"].get<bool>();
            std::ofstream(scen_dir / "report.json") << rep.dump(2) << '\n';
        } catch (const Error& e) {
            row.error = e.what();
            row.passed = false;
        }
        summary.rows.push_back(std::move(row));
    }

    std::ofstream csv(out / "summary.csv");
    csv << "scenario,converged,residual,sweeps,suites_passed,suites_failed,passed,error\n";
    ojson js = ojson::array();
    for (const auto& r : summary.rows) {
        std::string ok, bad;
        for (const auto& [name, pass] : r.suites) {
            auto& dst = pass ? ok : bad;
            if (!dst.empty()) dst += ';';
            dst += name;
        }
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        csv << r.scenario << ',' << (r.converged ? "yes" : "no") << ',' << fmt_double(r.residual) << ','
            << r.sweeps << ',' << ok << ',' << bad << ',' << (r.passed ? "pass" : "fail") << ','
            << err << '\n';
        ojson suites = ojson::object();
        for (const auto& [name, pass] : r.suites) suites[name] = pass ? "pass" : "fail";
        js.push_back({{"scenario", r.scenario},
                      {"converged", r.converged},
                      {"residual", fmt_double(r.residual)},
                      {"sweeps", r.sweeps},
                      {"suites", std::move(suites)},
                      {"passed", r.passed},
                      {"error", r.error}});
    }
    std::ofstream(out / "summary.json") << js.dump(2) << '\n';
    return summary;
}

}  // namespace nilap
