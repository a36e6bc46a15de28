#include "pdeopt/error.hpp"
#include "pdeopt/harness.hpp"
#include "pdeopt/reference.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdeopt;
using nlohmann::json;

namespace {

ExperimentSpec small_wave(int runs, int threads = 1)
{
    ExperimentSpec e;
    e.problem = wave_problem();
    e.resolutions = {{8, 8}, {10, 10}};
    e.runs = runs;
    e.seed = 3;
    e.methods = {{{2, 2}, InitKind::Random}, {{2, 4}, InitKind::Multilinear}};
    e.cascade.start = 6;
    e.cascade.step = 2;
    e.optimizer.max_iterations = 300;
    e.threads = threads;
    return e;
}

json strip(json s)
{
    s.erase("failures");
    s.erase("experiment");
    return s;
}

} // namespace

TEST_CASE("summary statistics with a Student-t interval")
{
    const Stat a = summarize({1.0, 2.0, 3.0});
    CHECK(a.count == 3);
    CHECK(a.mean == 2.0);
    CHECK(*a.stddev == doctest::Approx(1.0).epsilon(1e-15));
    // Closed-form t quantile for two degrees of freedom: (2p - 1) / sqrt(2 p (1 - p)).
    CHECK(*a.ci95 == doctest::Approx(2.4841377117503311).epsilon(1e-14));
    const Stat b = summarize({0.5, 0.25, 0.125, 4.0, 2.0});
    CHECK(b.mean == 1.375);
    // Quantile from a 30-digit root of the regularised incomplete beta.
    CHECK(*b.ci95 == doctest::Approx(2.0473341290098767).epsilon(1e-14));

    const Stat one = summarize({0.25});
    CHECK(one.mean == 0.25);
    CHECK_FALSE(one.stddev.has_value());
    CHECK_FALSE(one.ci95.has_value());
    CHECK(summarize({}).count == 0);
}

TEST_CASE("init kind names")
{
    CHECK(parse_init_kind("interpn") == InitKind::Multilinear);
    CHECK(parse_init_kind("cascade") == InitKind::Multilinear);
    CHECK(parse_init_kind("rbf") == InitKind::Rbf);
    CHECK(to_string(InitKind::Random) == "random");
    CHECK_THROWS_AS((parse_init_kind("nn")), Error);
}

TEST_CASE("cascade plan schedules")
{
    CascadePlan plan;
    const auto s = plan.schedule({50, 50}, {{30, 30}, {40, 40}, {50, 50}});
    REQUIRE(s.size() == 9);
    CHECK(s.front() == std::pair<std::size_t, std::size_t>{10, 10});
    CHECK(s.back() == std::pair<std::size_t, std::size_t>{50, 50});
    for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k].first > s[k - 1].first);

    CascadePlan two;
    two.levels = {25};
    CHECK(two.schedule({50, 50}) == std::vector<std::pair<std::size_t, std::size_t>>{{25, 25}, {50, 50}});

    // A requested resolution off the default ladder is inserted.
    const auto m = plan.schedule({40, 40}, {{22, 22}, {40, 40}});
    CHECK(std::find(m.begin(), m.end(), std::pair<std::size_t, std::size_t>{22, 22}) != m.end());
}

TEST_CASE("experiment JSON parsing")
{
    const auto e = experiment_from_json(json::parse(R"({
      "problem": "heat", "resolutions": [20, [30, 35], "40x40"], "runs": 2, "seed": 9, "lambda": 3,
      "policies": [[2, 2], "2,4"], "inits": ["random", "interpn"], "optimizer": {"rel_loss_tol": 1e-12},
      "cascade": {"levels": [10]}
    })"));
    CHECK(e.problem.name == "heat");
    CHECK(e.problem.lambda == 3.0);
    CHECK(e.resolutions == std::vector<std::pair<std::size_t, std::size_t>>{{20, 20}, {30, 35}, {40, 40}});
    CHECK(e.methods.size() == 4);
    CHECK(e.optimizer.rel_loss_tol == 1e-12);
    CHECK(e.cascade.levels == std::vector<std::size_t>{10});
    const auto back = experiment_from_json(to_json(e));
    CHECK(back.methods == e.methods);
    CHECK(back.resolutions == e.resolutions);

    CHECK_THROWS_AS((experiment_from_json(json::parse(R"({"problem": "wave", "resolutions": [10], "runs": 0})"))), Error);
    CHECK_THROWS_AS((experiment_from_json(json::parse(R"({"problem": "wave", "resolutions": [20, 10]})"))), Error);
    CHECK_THROWS_AS((experiment_from_json(json::parse(R"({"problem": "wave", "resolutions": []})"))), Error);
    CHECK_THROWS_AS((experiment_from_json(json::parse(R"({"problem": "wave", "resolutions": [10], "policies": [[3, 2]]})"))),
                    Error);
}

TEST_CASE("experiment rows, ids and summary layout")
{
    const auto spec = small_wave(2);
    const auto r = run_experiment(spec);
    REQUIRE(r.rows.size() == 2 * 2 * 2);
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
        CHECK(r.rows[k].run_id == static_cast<long>(k));
        CHECK(r.rows[k].mae.has_value());
        CHECK(r.rows[k].converged != "error");
    }
    CHECK(r.rows[0].seed == 3);
    CHECK(r.rows[1].seed == 4);
    const auto& t = r.summary.at("table");
    CHECK(t.at("columns") == json::array({"8x8", "10x10"}));
    CHECK(t.at("rows").size() == 2);
    CHECK(r.summary.at("groups").size() == 4);
    CHECK(r.summary.at("failures").empty());
    for (const auto& g : r.summary.at("groups")) CHECK(g.at("mae").at("ci_defined") == true);
}

TEST_CASE("a single run leaves the interval undefined")
{
    const auto r = run_experiment(small_wave(1));
    for (const auto& g : r.summary.at("groups")) {
        CHECK(g.at("mae").at("ci_defined") == false);
        CHECK(g.at("mae").at("ci95").is_null());
    }
}

TEST_CASE("thread count does not change results")
{
    const auto a = run_experiment(small_wave(2, 1));
    const auto b = run_experiment(small_wave(2, 4));
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].run_id == b.rows[k].run_id);
        CHECK(a.rows[k].iterations == b.rows[k].iterations);
        CHECK(*a.rows[k].mae == *b.rows[k].mae);
        CHECK(a.rows[k].interior_loss == b.rows[k].interior_loss);
    }
}

TEST_CASE("summary is reproducible from the per-run CSV")
{
    const auto dir = std::filesystem::temp_directory_path() / "pdeopt_harness_test";
    std::filesystem::remove_all(dir);
    auto spec = small_wave(2);
    spec.output = (dir / "runs.csv").string();
    const auto r = run_experiment(spec);
    REQUIRE(std::filesystem::exists(dir / "runs.csv"));
    REQUIRE(std::filesystem::exists(dir / "runs.summary.json"));
    REQUIRE(std::filesystem::exists(dir / "runs.table.csv"));

    std::ifstream in(dir / "runs.csv");
    const auto rows = read_rows_csv(in);
    CHECK(strip(summarize_rows(rows)) == strip(r.summary));

    std::ifstream js(dir / "runs.summary.json");
    CHECK(strip(json::parse(js)) == strip(r.summary));

    std::ifstream table(dir / "runs.table.csv");
    std::string header;
    std::getline(table, header);
    CHECK(header == "method,interior_order,boundary_order,8x8,10x10");
    std::filesystem::remove_all(dir);
}

TEST_CASE("csv rows round trip")
{
    RunRow a;
    a.run_id = 4;
    a.n_x = 30;
    a.n_t = 40;
    a.method = {{2, 4}, InitKind::Rbf};
    a.seed = 123;
    a.iterations = 77;
    a.converged = "plateau";
    a.mae = 0.1 + 0.2;
    a.interior_loss = 1e-300;
    a.boundary_loss = 3.5;
    a.wall_time = 0.125;
    RunRow b = a;
    b.run_id = 5;
    b.converged = "error";
    b.mae.reset();
    std::stringstream ss;
    write_rows_csv(ss, {a, b});
    const auto back = read_rows_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].mae == a.mae);
    CHECK(back[0].method == a.method);
    CHECK(back[0].interior_loss == a.interior_loss);
    CHECK(back[0].wall_time == a.wall_time);
    CHECK_FALSE(back[1].mae.has_value());
    CHECK(back[1].converged == "error");
}

TEST_CASE("a failing run is recorded and the sweep continues")
{
    ExperimentSpec e;
    e.problem = heat_problem();
    // The oracle refuses 10x10 grids; 20x20 passes its gate.
    e.resolutions = {{10, 10}, {20, 20}};
    e.runs = 1;
    e.methods = {{{2, 2}, InitKind::Random}};
    e.optimizer.max_iterations = 100;
    const auto r = run_experiment(e);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].converged == "error");
    CHECK_FALSE(r.rows[0].error.empty());
    CHECK(r.rows[1].converged != "error");
    CHECK(r.rows[1].mae.has_value());
    CHECK(r.summary.at("failures").size() == 1);
    CHECK(r.summary.at("table").at("rows")[0].at("mae")[0].is_null());
}

TEST_CASE("solve requests")
{
    const auto r = solve_request_from_json(json::parse(R"({"grid": "12x9", "scheme": [2, 4], "seed": 4, "lambda": 2})"));
    CHECK(r.problem.name == "wave");
    CHECK(r.problem.grid.n_x() == 12);
    CHECK(r.problem.grid.n_t() == 9);
    CHECK(r.problem.lambda == 2.0);
    CHECK(r.policy == SchemePolicy{2, 4});
    CHECK(r.init == InitKind::Random);

    auto q = solve_request_from_json(json::parse(R"({"grid": [10, 10], "optimizer": {"max_iterations": 50}})"));
    CHECK(run_solve_request(q).size() == 1);
    q = solve_request_from_json(
        json::parse(R"({"grid": [12, 12], "init": "interp", "cascade": {"start": 6, "step": 3}, "optimizer": {"max_iterations": 50}})"));
    const auto levels = run_solve_request(q);
    CHECK(levels.size() == 3);
    CHECK(levels.back().result.field.grid().n_x() == 12);

    CHECK_THROWS_AS((solve_request_from_json(json::parse(R"({"scheme": [3, 2]})"))), Error);
    CHECK_THROWS_AS((solve_request_from_json(json::parse(R"({"problem": "poisson"})"))), Error);
}
