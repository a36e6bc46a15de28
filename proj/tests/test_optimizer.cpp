#include "pdeopt/error.hpp"
#include "pdeopt/optimizer.hpp"
#include "pdeopt/reference.hpp"

#include <doctest.h>

#include <cmath>

using namespace pdeopt;

TEST_CASE("optimizer config validation and JSON")
{
    OptimizerConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.iteration_budget(100) == 1000);
    c.max_iterations = 7;
    CHECK(c.iteration_budget(100) == 7);
    c.grad_tol = 0.0;
    CHECK_THROWS_AS((c.validate()), Error);

    OptimizerConfig d;
    d.history_length = 4;
    d.rel_loss_tol = 1e-12;
    d.algorithm = Algorithm::GradientDescent;
    const auto back = optimizer_config_from_json(to_json(d));
    CHECK(back.history_length == 4);
    CHECK(back.rel_loss_tol == 1e-12);
    CHECK(back.algorithm == Algorithm::GradientDescent);
    CHECK(optimizer_config_from_json(nlohmann::json::object()).history_length == OptimizerConfig{}.history_length);
}

TEST_CASE("stationary start stops immediately")
{
    const auto p = wave_problem(9, 9);
    const Field exact = wave_exact(p.grid);
    // Solve tightly once, then restart from the result.
    OptimizerConfig cfg;
    cfg.rel_loss_tol = 1e-14;
    cfg.grad_tol = 1e-7;
    const auto first = minimize(p, exact, {2, 2}, cfg);
    REQUIRE(first.converged == Convergence::Gradient);
    const auto again = minimize(p, first.field, {2, 2}, cfg);
    CHECK(again.converged == Convergence::Gradient);
    CHECK(again.iterations <= 2);
    CHECK(mae(again.field, first.field) <= 1e-7);
}

TEST_CASE("wave 10x10 from a random field")
{
    const auto p = wave_problem(10, 10);
    const auto res = minimize(p, random_field(p.grid, 0), {2, 2}, {}, wave_exact(p.grid));
    REQUIRE(res.mae_vs_reference.has_value());
    CHECK(*res.mae_vs_reference <= 0.02);
    CHECK(res.iterations <= OptimizerConfig{}.iteration_budget(p.grid.size()));
    CHECK(res.final_loss.total < res.loss_history.front().total);
}

TEST_CASE("loss history never increases")
{
    for (SchemePolicy pol : {SchemePolicy{2, 2}, SchemePolicy{2, 4}, SchemePolicy{4, 4}}) {
        const auto p = heat_problem(12, 12);
        OptimizerConfig cfg;
        cfg.max_iterations = 400;
        const auto res = minimize(p, random_field(p.grid, 3), pol, cfg);
        REQUIRE(res.loss_history.size() >= 2);
        for (std::size_t k = 1; k < res.loss_history.size(); ++k)
            CHECK(res.loss_history[k].total <= res.loss_history[k - 1].total);
        CHECK(res.iterations <= 400);
        CHECK(res.history_iterations.size() == res.loss_history.size());
    }
}

TEST_CASE("gradient descent also descends")
{
    const auto p = wave_problem(8, 8);
    OptimizerConfig cfg;
    cfg.algorithm = Algorithm::GradientDescent;
    cfg.max_iterations = 200;
    const auto res = minimize(p, random_field(p.grid, 1), {2, 2}, cfg);
    for (std::size_t k = 1; k < res.loss_history.size(); ++k) CHECK(res.loss_history[k].total <= res.loss_history[k - 1].total);
    CHECK(res.final_loss.total < res.loss_history.front().total);
}

TEST_CASE("solves are deterministic")
{
    const auto p = wave_problem(12, 12);
    OptimizerConfig cfg;
    cfg.max_iterations = 500;
    const auto a = minimize(p, random_field(p.grid, 5), {2, 4}, cfg, wave_exact(p.grid));
    const auto b = minimize(p, random_field(p.grid, 5), {2, 4}, cfg, wave_exact(p.grid));
    CHECK(a.field == b.field);
    CHECK(a.iterations == b.iterations);
    CHECK(*a.mae_vs_reference == *b.mae_vs_reference);
}

TEST_CASE("history stride keeps the final iterate")
{
    const auto p = wave_problem(8, 8);
    OptimizerConfig cfg;
    cfg.history_stride = 7;
    cfg.max_iterations = 50;
    const auto res = minimize(p, random_field(p.grid, 2), {2, 2}, cfg);
    CHECK(res.history_iterations.front() == 0);
    CHECK(res.history_iterations.back() == res.iterations);
    CHECK(res.loss_history.back() == res.final_loss);
}

TEST_CASE("budget stop and result JSON")
{
    const auto p = wave_problem(10, 10);
    OptimizerConfig cfg;
    cfg.max_iterations = 5;
    const auto res = minimize(p, random_field(p.grid, 0), {2, 2}, cfg);
    CHECK(res.converged == Convergence::Budget);
    CHECK(res.iterations == 5);
    const auto j = to_json(res, true);
    CHECK(j.at("iterations") == 5);
    CHECK(j.at("converged") == "budget");
    CHECK(j.at("field").size() == 10);
    CHECK_FALSE(to_json(res, false).contains("field"));
}

TEST_CASE("mismatched init is rejected")
{
    const auto p = wave_problem(10, 10);
    CHECK_THROWS_AS((minimize(p, random_field(GridSpec(0.0, 1.0, 9, 0.0, 1.0, 10), 0), {2, 2}, {})), Error);
}
