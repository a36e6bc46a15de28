// Command-line front end. Talks to the solver only through the C API.

#include "pdeopt/pdeopt.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kSolverError = 1;
constexpr int kInvalidInput = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(pdeopt_status s)
{
    switch (s) {
    case PDEOPT_OK: return kOk;
    case PDEOPT_INVALID_ARGUMENT:
    case PDEOPT_GRID_TOO_SMALL:
    case PDEOPT_SHAPE_MISMATCH:
    case PDEOPT_IO: return kInvalidInput;
    default: return kSolverError;
    }
}

int report(pdeopt_status s)
{
    std::cerr << "error (" << pdeopt_status_name(s) << "): " << pdeopt_last_error() << "\n";
    return exit_code(s);
}

/// Owns a string returned by the library.
struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { pdeopt_string_free(p); }
    [[nodiscard]] std::string str() const { return p ? p : ""; }
};

json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    }
    catch (const json::parse_error& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

json parse_grid(const std::string& s)
{
    const auto x = s.find('x');
    std::size_t a = 0, b = 0;
    std::size_t used_a = 0, used_b = 0;
    try {
        if (x == std::string::npos) throw std::invalid_argument("");
        a = std::stoul(s.substr(0, x), &used_a);
        b = std::stoul(s.substr(x + 1), &used_b);
    }
    catch (const std::exception&) {
        throw UsageError("--grid expects NXxNT, got '" + s + "'");
    }
    if (used_a != x || used_b != s.size() - x - 1 || s[0] == '-' || s[x + 1] == '-')
        throw UsageError("--grid expects NXxNT, got '" + s + "'");
    return json::array({a, b});
}

json parse_scheme(const std::string& s)
{
    if (s == "2,2") return json::array({2, 2});
    if (s == "2,4") return json::array({2, 4});
    if (s == "4,2") return json::array({4, 2});
    if (s == "4,4") return json::array({4, 4});
    throw UsageError("--scheme expects I,B with orders 2 or 4, got '" + s + "'");
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text << "\n";
}

struct SolveArgs {
    std::string config, problem, grid, scheme, init, out;
    std::optional<double> lambda;
    std::optional<std::uint64_t> seed;
    std::optional<long> max_iterations;
    std::optional<double> rel_loss_tol;
    bool no_field = false;
};

json build_request(const SolveArgs& a)
{
    json req = a.config.empty() ? json::object() : load_json(a.config);
    if (!req.is_object()) throw UsageError("solve config must be a JSON object");
    if (!a.problem.empty()) req["problem"] = a.problem;
    if (!a.grid.empty()) req["grid"] = parse_grid(a.grid);
    if (!a.scheme.empty()) req["scheme"] = parse_scheme(a.scheme);
    if (!a.init.empty()) req["init"] = a.init;
    if (a.lambda) req["lambda"] = *a.lambda;
    if (a.seed) req["seed"] = *a.seed;
    if (a.max_iterations) req["optimizer"]["max_iterations"] = *a.max_iterations;
    if (a.rel_loss_tol) req["optimizer"]["rel_loss_tol"] = *a.rel_loss_tol;
    return req;
}

int run_solve(const SolveArgs& a)
{
    const json req = build_request(a);
    pdeopt_result* res = nullptr;
    const auto st = pdeopt_solve_request(req.dump().c_str(), &res);
    if (st != PDEOPT_OK) return report(st);
    OwnedString text;
    const auto st2 = pdeopt_result_json(res, a.no_field ? 0 : 1, &text.p);
    pdeopt_result_free(res);
    if (st2 != PDEOPT_OK) return report(st2);
    write_text(a.out, text.str());
    return kOk;
}

struct ReferenceArgs {
    std::string config, problem = "wave", grid = "20x20", out;
};

int run_reference(const ReferenceArgs& a)
{
    const json g = parse_grid(a.grid);
    pdeopt_problem* p = nullptr;
    pdeopt_status st;
    if (!a.config.empty()) {
        st = pdeopt_problem_from_json(load_json(a.config).dump().c_str(), &p);
        if (st == PDEOPT_OK) {
            pdeopt_problem* resized = nullptr;
            st = pdeopt_problem_resized(p, g[0].get<std::size_t>(), g[1].get<std::size_t>(), &resized);
            pdeopt_problem_free(p);
            p = resized;
        }
    }
    else {
        st = pdeopt_problem_builtin(a.problem.c_str(), g[0].get<std::size_t>(), g[1].get<std::size_t>(), 10.0, &p);
    }
    if (st != PDEOPT_OK) return report(st);
    pdeopt_field* f = nullptr;
    st = pdeopt_field_reference(p, &f);
    pdeopt_problem_free(p);
    if (st != PDEOPT_OK) return report(st);
    st = pdeopt_field_write_csv(f, a.out.empty() ? nullptr : a.out.c_str());
    pdeopt_field_free(f);
    return st == PDEOPT_OK ? kOk : report(st);
}

struct ExperimentArgs {
    std::string config, out;
    std::optional<int> runs, threads;
    std::optional<std::uint64_t> seed;
};

int run_experiment(const ExperimentArgs& a)
{
    json spec = load_json(a.config);
    if (!spec.is_object()) throw UsageError("experiment config must be a JSON object");
    if (a.runs) {
        if (*a.runs < 1) throw UsageError("--runs must be >= 1");
        spec["runs"] = *a.runs;
    }
    if (a.seed) spec["seed"] = *a.seed;
    if (a.threads) spec["threads"] = *a.threads;
    OwnedString summary;
    const auto st = pdeopt_experiment_run(spec.dump().c_str(), a.out.empty() ? nullptr : a.out.c_str(), &summary.p);
    if (st != PDEOPT_OK) return report(st);

    const json s = json::parse(summary.str());
    const auto& t = s.at("table");
    std::cout << "method,interior_order,boundary_order";
    for (const auto& c : t.at("columns")) std::cout << ',' << c.get<std::string>();
    std::cout << "\n";
    for (const auto& r : t.at("rows")) {
        std::cout << r.at("init").get<std::string>() << ',' << r.at("interior_order") << ',' << r.at("boundary_order");
        for (const auto& v : r.at("mae")) {
            std::cout << ',';
            if (!v.is_null()) std::cout << v.get<double>();
        }
        std::cout << "\n";
    }
    const auto& failures = s.at("failures");
    if (!failures.empty()) std::cerr << failures.size() << " run(s) failed; see summary\n";
    return kOk;
}

struct ValidateArgs {
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> cases;
};

int run_validate(const ValidateArgs& a)
{
    json opts = json::object();
    if (a.seed) opts["seed"] = *a.seed;
    if (a.cases) opts["gradient_cases"] = *a.cases;
    OwnedString text;
    int passed = 0;
    const auto st = pdeopt_validate(opts.dump().c_str(), &text.p, &passed);
    if (st != PDEOPT_OK) return report(st);
    const json r = json::parse(text.str());
    for (const auto& c : r.at("checks"))
        std::cout << (c.at("passed").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << "  value="
                  << c.at("value").get<double>() << " threshold=" << c.at("threshold").get<double>() << "  "
                  << c.at("detail").get<std::string>() << "\n";
    if (!a.out.empty()) write_text(a.out, text.str());
    return passed ? kOk : kSolverError;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Finite-difference PDE solver by penalised residual minimisation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pdeopt_version()));

    SolveArgs solve;
    auto* cmd_solve = app.add_subcommand("solve", "Solve one problem and print the result as JSON");
    auto* opt_config = cmd_solve->add_option("--config", solve.config, "Solve request JSON")->check(CLI::ExistingFile);
    cmd_solve->add_option("--problem", solve.problem, "Builtin problem")->check(CLI::IsMember({"wave", "heat"}));
    cmd_solve->add_option("--grid", solve.grid, "Grid size NXxNT");
    cmd_solve->add_option("--scheme", solve.scheme, "Interior,boundary stencil orders, e.g. 2,4");
    cmd_solve->add_option("--init", solve.init, "Initial field")->check(CLI::IsMember({"random", "interp", "rbf", "cascade"}));
    cmd_solve->add_option("--lambda", solve.lambda, "Boundary penalty weight")->check(CLI::PositiveNumber);
    cmd_solve->add_option("--seed", solve.seed, "Random seed");
    cmd_solve->add_option("--max-iterations", solve.max_iterations, "Optimizer iteration budget")->check(CLI::PositiveNumber);
    cmd_solve->add_option("--rel-loss-tol", solve.rel_loss_tol, "Plateau tolerance")->check(CLI::PositiveNumber);
    cmd_solve->add_option("--out", solve.out, "Output JSON path (default stdout)");
    cmd_solve->add_flag("--no-field", solve.no_field, "Omit the field from the output");
    cmd_solve->get_option("--problem")->excludes(opt_config);

    ExperimentArgs exp;
    auto* cmd_exp = app.add_subcommand("experiment", "Run an experiment sweep and write CSV + summary");
    cmd_exp->add_option("--config", exp.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
    cmd_exp->add_option("--out", exp.out, "Per-run CSV path (overrides the config)");
    cmd_exp->add_option("--runs", exp.runs, "Runs per method and resolution");
    cmd_exp->add_option("--seed", exp.seed, "Base seed");
    cmd_exp->add_option("--threads", exp.threads, "Worker threads")->check(CLI::PositiveNumber);

    ReferenceArgs ref;
    auto* cmd_ref = app.add_subcommand("reference", "Write the reference field as CSV");
    auto* ref_config = cmd_ref->add_option("--config", ref.config, "Problem JSON")->check(CLI::ExistingFile);
    cmd_ref->add_option("--problem", ref.problem, "Builtin problem")
        ->check(CLI::IsMember({"wave", "heat"}))
        ->excludes(ref_config);
    cmd_ref->add_option("--grid", ref.grid, "Grid size NXxNT");
    cmd_ref->add_option("--out", ref.out, "Output CSV path (default stdout)");

    ValidateArgs val;
    auto* cmd_val = app.add_subcommand("validate", "Run the invariant suite");
    cmd_val->add_option("--seed", val.seed, "Seed for the random gradient cases");
    cmd_val->add_option("--cases", val.cases, "Number of gradient cases")->check(CLI::PositiveNumber);
    cmd_val->add_option("--out", val.out, "Write the JSON report here");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::Success& e) {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalidInput;
    }

    try {
        if (*cmd_solve) return run_solve(solve);
        if (*cmd_exp) return run_experiment(exp);
        if (*cmd_ref) return run_reference(ref);
        if (*cmd_val) return run_validate(val);
    }
    catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help() << "\n";
        return kInvalidInput;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverError;
    }
    return kInvalidInput;
}
