#pragma once

#include "pdeopt/operator.hpp"
#include "pdeopt/optimizer.hpp"
#include "pdeopt/stencil.hpp"
#include "pdeopt/warmstart.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pdeopt {

/// How a run obtains its initial field. Anything but Random runs a cascade
/// through the experiment's level schedule with the named interpolator.
enum class InitKind { Random, Multilinear, Rbf };

std::string to_string(InitKind k);
/// "random", "multilinear" (also "interp", "interpn", "cascade"), "rbf".
InitKind parse_init_kind(const std::string& s);

struct Method {
    SchemePolicy policy;
    InitKind init = InitKind::Random;

    bool operator==(const Method&) const = default;
};

struct CascadePlan {
    /// First level and spacing of the default schedule.
    std::size_t start = 10;
    std::size_t step = 5;
    /// Explicit coarse levels; replaces start/step when non-empty.
    std::vector<std::size_t> levels;

    /// Square levels below (n_x, n_t) merged with `extra`, ending at (n_x, n_t).
    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>>
    schedule(std::pair<std::size_t, std::size_t> last, const std::vector<std::pair<std::size_t, std::size_t>>& extra = {}) const;
};

struct ExperimentSpec {
    ProblemSpec problem;
    std::vector<std::pair<std::size_t, std::size_t>> resolutions;
    int runs = 30;
    std::uint64_t seed = 0;
    std::vector<Method> methods;
    CascadePlan cascade{};
    double rbf_smooth = 10.0;
    OptimizerConfig optimizer{};
    /// Per-run CSV path; empty keeps results in memory only.
    std::string output{};
    /// Worker threads; 0 means the THREADS environment variable, else 1.
    int threads = 0;

    /// Throws InvalidArgument on runs < 1, empty or non-increasing resolutions, or no methods.
    void validate() const;
};

/// Reads an experiment description. `problem` is a builtin name or a problem
/// object; methods come from "methods" ([{init, scheme:[I,B]}]) or from the
/// product of "policies" and "inits".
ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& e);

struct RunRow {
    long run_id = 0;
    std::size_t n_x = 0, n_t = 0;
    Method method;
    std::uint64_t seed = 0;
    long iterations = 0;
    /// gradient, plateau, budget or error.
    std::string converged;
    std::optional<double> mae;
    double interior_loss = 0.0;
    double boundary_loss = 0.0;
    double wall_time = 0.0;
    std::string error;
};

/// Sample statistics with a two-sided 95% Student-t interval. The interval
/// is undefined for fewer than two samples.
struct Stat {
    std::size_t count = 0;
    double mean = 0.0;
    std::optional<double> stddev;
    std::optional<double> ci95;
};

Stat summarize(const std::vector<double>& values);

struct ExperimentResult {
    std::vector<RunRow> rows;
    nlohmann::json summary;
};

/// Runs every (method, resolution, seed) combination. A failing run becomes
/// a row with converged = "error"; it never aborts the sweep. Rows are
/// ordered by run_id whatever the thread count. Writes the CSV, a
/// `<stem>.summary.json` and a `<stem>.table.csv` pivot when `output` is set.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// A single solve as the CLI describes it.
struct SolveRequest {
    ProblemSpec problem;
    SchemePolicy policy{};
    InitKind init = InitKind::Random;
    std::uint64_t seed = 0;
    OptimizerConfig optimizer{};
    CascadePlan cascade{};
    double rbf_smooth = 10.0;
};

/// Keys: problem (builtin name or object, default "wave"), grid ([nx, nt],
/// N or "NXxNT"), scheme, init, seed, lambda, optimizer, cascade, rbf_smooth.
SolveRequest solve_request_from_json(const nlohmann::json& j);
/// Levels solved in order; the last is on the requested grid. A random init
/// yields exactly one level.
std::vector<CascadeLevel> run_solve_request(const SolveRequest& r);

void write_rows_csv(std::ostream& out, const std::vector<RunRow>& rows);
std::vector<RunRow> read_rows_csv(std::istream& in);
/// Summary of rows: per (method, resolution) group statistics and a pivot of
/// mean MAE with one row per method and one column per resolution.
nlohmann::json summarize_rows(const std::vector<RunRow>& rows);
/// Method rows x resolution columns of mean MAE, as CSV.
void write_table_csv(std::ostream& out, const nlohmann::json& summary);

} // namespace pdeopt
