// nilap: command-line front end for the nonlocal infinity Laplacian toolkit.
//
//   nilap solve   --config s.json --out solution.csv [--operator-out op.csv]
//   nilap infconv --config s.json --epsilon 0.05 --out infconv.csv
//   nilap verify  --config s.json --suite all --out report.json [--seed N]
//   nilap corpus  DIR --out OUTDIR
//
// Exit status: 0 when every gated check passed, 1 when one failed or the
// solver did not converge, 2 on input errors.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nilap/runner.hpp"

namespace {

using namespace nilap;

struct Common {
    std::string config;
    std::string out;
    bool allow_sign_change = false;
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error(Errc::InvalidArgument, "cannot write " + path);
    return os;
}

int cmd_solve(const Common& c, const std::string& operator_out) {
    const Scenario s = load_scenario(c.config, c.allow_sign_change);
    const GridDomain domain = scenario_domain(s);
    const NonlocalOperator op(domain, s.spec.alpha);
    ProblemSpec relaxed = s.spec;
    relaxed.strict_sign_check = false;
    const auto f = sample_rhs(relaxed, domain);

    SolveResult sol;
    int status = 0;
    try {
        sol = solve(s.spec, domain, s.solver);
    } catch (const NotConverged& nc) {
        std::cerr << nc.what() << '\n';
        sol = nc.partial();
        status = 1;
    }
    auto os = open_out(c.out);
    write_solution_csv(os, op, sol.u, f);
    if (!operator_out.empty()) {
        auto oo = open_out(operator_out);
        write_operator_csv(oo, op, sol.u);
    }
    std::cout << s.name << ": sweeps=" << sol.sweeps_used << " residual=" << fmt_double(sol.residual_max)
              << (sol.converged ? " converged" : " NOT converged") << '\n';
    return status;
}

int cmd_infconv(const Common& c, double epsilon) {
    const Scenario s = load_scenario(c.config, c.allow_sign_change);
    const GridDomain domain = scenario_domain(s);
    const auto sol = solve(s.spec, domain, s.solver);

    // Normal form 0 <= u <= L over all nodes, so the argmin bound holds everywhere.
    const auto norm = normalization(sol.u, domain);
    const Field un = shifted(sol.u, -norm.shift);
    double L = 0.0;
    for (double v : un.values) L = std::max(L, v);
    const auto ic = inf_convolve(un, epsilon, domain, L);

    auto os = open_out(c.out);
    os << "node,u,u_eps,xstar,distance,r_eps,margin\n";
    double min_margin = std::numeric_limits<double>::infinity();
    for (NodeId x = 0; x < domain.size(); ++x) {
        const double dist = domain.node_distance(x, ic.argmin[x]);
        const double margin = ic.r_eps - dist;
        min_margin = std::min(min_margin, margin);
        os << x << ',' << fmt_double(sol.u[x]) << ',' << fmt_double(ic.u_eps[x] + norm.shift) << ','
           << ic.argmin[x] << ',' << fmt_double(dist) << ',' << fmt_double(ic.r_eps) << ','
           << fmt_double(margin) << '\n';
    }
    std::cout << s.name << ": eps=" << fmt_double(epsilon) << " r_eps=" << fmt_double(ic.r_eps)
              << " min_margin=" << fmt_double(min_margin) << '\n';
    return min_margin >= 0.0 ? 0 : 1;
}

int cmd_verify(const Common& c, const std::string& suite, const std::vector<std::uint64_t>& seeds) {
    Scenario s = load_scenario(c.config, c.allow_sign_change);
    if (!seeds.empty()) s.seeds = seeds;
    std::vector<std::string> suites;
    if (suite.empty()) {
        suites = s.suites;
    } else if (suite == "all") {
        suites = known_suites();
    } else {
        if (std::find(known_suites().begin(), known_suites().end(), suite) == known_suites().end())
            throw Error(Errc::ValidationError, "unknown suite '" + suite + "'");
        suites = {suite};
    }
    const GridDomain domain = scenario_domain(s);
    SolveResult sol;
    try {
        sol = solve(s.spec, domain, s.solver);
    } catch (const NotConverged& nc) {
        std::cerr << nc.what() << '\n';
        sol = nc.partial();
    }
    const ojson rep = run_suites(s, domain, sol, suites);
    auto os = open_out(c.out);
    os << rep.dump(2) << '\n';
    int failed = 0;
    for (const auto& chk : rep["checks"])
        if (chk["status"] == "fail") {
            ++failed;
            std::cout << "FAIL " << chk["suite"].get<std::string>() << '/'
                      << chk["check"].get<std::string>() << '\n';
        }
    std::cout << s.name << ": " << rep["checks"].size() << " checks, " << failed << " failed\n";
    return rep["passed"].get<bool>() ? 0 : 1;
}

int cmd_corpus(const std::string& dir, const std::string& out) {
    const auto summary = run_corpus(dir, out);
    for (const auto& r : summary.rows) {
        std::cout << (r.passed ? "pass " : "FAIL ") << r.scenario << " residual=" << fmt_double(r.residual)
                  << " sweeps=" << r.sweeps;
        if (!r.error.empty()) std::cout << " error=" << r.error;
        std::cout << '\n';
    }
    return summary.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid toolkit for the nonlocal infinity Laplacian"};
    app.require_subcommand(1);

    Common common;
    std::string operator_out, suite, corpus_dir;
    double epsilon = 0.05;
    std::vector<std::uint64_t> seeds;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "Output file")->required();
        sub->add_flag("--probe-allow-sign-change", common.allow_sign_change,
                      "Accept right-hand sides that change sign (exploratory)");
    };

    auto* solve_cmd = app.add_subcommand("solve", "Solve a scenario and write solution.csv");
    add_common(solve_cmd);
    solve_cmd->add_option("--operator-out", operator_out, "Also write per-node operator values");

    auto* infconv_cmd = app.add_subcommand("infconv", "Infimal convolution of the solution");
    add_common(infconv_cmd);
    infconv_cmd->add_option("--epsilon", epsilon, "Regularisation parameter")->check(CLI::PositiveNumber);

    auto* verify_cmd = app.add_subcommand("verify", "Run verification suites on a scenario");
    add_common(verify_cmd);
    verify_cmd->add_option("--suite", suite, "all or one suite name (default: the scenario's list)");
    verify_cmd->add_option("--seed", seeds, "Seeds for randomized initializations");

    auto* corpus_cmd = app.add_subcommand("corpus", "Solve and verify every scenario in a directory");
    corpus_cmd->add_option("dir", corpus_dir, "Scenario directory")->required();
    corpus_cmd->add_option("--out", common.out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve_cmd) return cmd_solve(common, operator_out);
        if (*infconv_cmd) return cmd_infconv(common, epsilon);
        if (*verify_cmd) return cmd_verify(common, suite, seeds);
        if (*corpus_cmd) return cmd_corpus(corpus_dir, common.out);
    } catch (const nilap::NotConverged& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
