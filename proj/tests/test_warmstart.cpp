#include "pdeopt/error.hpp"
#include "pdeopt/reference.hpp"
#include "pdeopt/warmstart.hpp"

#include <doctest.h>

#include <cmath>

using namespace pdeopt;

namespace {

Field sample(const GridSpec& g, auto fn)
{
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_t(); ++j) v[g.index(i, j)] = fn(g.x(i), g.t(j));
    return Field(g, std::move(v));
}

double max_abs_diff(const Field& a, const Field& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    return m;
}

} // namespace

TEST_CASE("multilinear interpolation onto the same grid is the identity")
{
    const GridSpec g(0.0, 1.0, 7, -1.0, 3.0, 9);
    const Field f = random_field(g, 1);
    CHECK(interp_multilinear(f, g) == f);
}

TEST_CASE("multilinear interpolation reproduces affine functions")
{
    const auto fn = [](double x, double t) { return 0.3 - 1.7 * x + 2.5 * t; };
    const GridSpec coarse(0.0, 1.0, 5, 0.0, 1.0, 5), fine = coarse.with_resolution(9, 9);
    CHECK(max_abs_diff(interp_multilinear(sample(coarse, fn), fine), sample(fine, fn)) <= 1e-14);
    const GridSpec odd = coarse.with_resolution(13, 8);
    CHECK(max_abs_diff(interp_multilinear(sample(coarse, fn), odd), sample(odd, fn)) <= 1e-14);
}

TEST_CASE("multilinear interpolation stays in range and hits coincident nodes")
{
    const GridSpec coarse(0.0, 1.0, 5, 0.0, 1.0, 6), fine = coarse.with_resolution(9, 11);
    const Field c = random_field(coarse, 3);
    const Field f = interp_multilinear(c, fine);
    CHECK(f.min() >= c.min());
    CHECK(f.max() <= c.max());
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 6; ++j) CHECK(f(2 * i, 2 * j) == c(i, j));
    CHECK_THROWS_AS((interp_multilinear(c, GridSpec(0.0, 2.0, 9, 0.0, 1.0, 11))), Error);
}

TEST_CASE("multilinear interpolation of the wave solution 25 to 50")
{
    const GridSpec c = wave_problem(25, 25).grid, f = c.with_resolution(50, 50);
    const double e = mae(interp_multilinear(wave_exact(c), f), wave_exact(f));
    // Baseline from an independent bilinear interpolant of the same samples.
    CHECK(e == doctest::Approx(0.0014678001848670331).epsilon(1e-9));
}

TEST_CASE("rbf with no smoothing reproduces the data nodes")
{
    const GridSpec g(0.0, 1.0, 6, 0.0, 2.0, 5);
    const Field c = random_field(g, 4);
    CHECK(max_abs_diff(interp_rbf(c, g, 0.0), c) <= 1e-8);
}

TEST_CASE("rbf keeps constant fields constant for any smoothing")
{
    const GridSpec g(0.0, 1.0, 5, 0.0, 1.0, 5), fine = g.with_resolution(9, 12);
    for (double s : {0.0, 0.1, 10.0, 1000.0}) {
        const Field out = interp_rbf(Field::constant(g, 2.75), fine, s);
        for (double v : out.values()) CHECK(std::abs(v - 2.75) <= 1e-8);
    }
}

TEST_CASE("rbf interpolation of the wave solution 25 to 50 with smoothing 10")
{
    const GridSpec c = wave_problem(25, 25).grid, f = c.with_resolution(50, 50);
    const double rbf = mae(interp_rbf(wave_exact(c), f, 10.0), wave_exact(f));
    // Baseline from an independent dense solve of the same augmented system.
    CHECK(rbf == doctest::Approx(0.13702644463112346).epsilon(1e-7));
    const double lin = mae(interp_multilinear(wave_exact(c), f), wave_exact(f));
    // Heavy smoothing flattens the interpolant well beyond the bilinear error.
    CHECK(rbf > lin);
    CHECK(mae(interp_rbf(wave_exact(c), f, 0.0), wave_exact(f)) < 0.01);
}

TEST_CASE("interpolation method names")
{
    CHECK(parse_interp_method("interpn") == InterpMethod::Multilinear);
    CHECK(parse_interp_method("cascade") == InterpMethod::Multilinear);
    CHECK(parse_interp_method("rbf") == InterpMethod::Rbf);
    CHECK_THROWS_AS((parse_interp_method("nn")), Error);
    CHECK(to_string(InterpMethod::Rbf) == "rbf");
}

TEST_CASE("cascade schedule")
{
    CHECK(cascade_schedule(10, 5, 50) == std::vector<std::size_t>{10, 15, 20, 25, 30, 35, 40, 45, 50});
    CHECK(cascade_schedule(10, 5, 27) == std::vector<std::size_t>{10, 15, 20, 25, 27});
    CHECK(cascade_schedule(10, 5, 10) == std::vector<std::size_t>{10});
}

TEST_CASE("single-level cascade equals a direct solve")
{
    const auto p = wave_problem(10, 10);
    OptimizerConfig cfg;
    cfg.max_iterations = 300;
    CascadeOptions opt;
    opt.seed = 17;
    const auto levels = cascade(p, {{10, 10}}, {2, 2}, cfg, opt);
    REQUIRE(levels.size() == 1);
    const auto direct = minimize(p, random_field(p.grid, 17), {2, 2}, cfg, wave_exact(p.grid));
    CHECK(levels[0].result.field == direct.field);
    CHECK(levels[0].result.iterations == direct.iterations);
    CHECK(*levels[0].result.mae_vs_reference == *direct.mae_vs_reference);
}

TEST_CASE("cascade levels run in order and feed each other")
{
    const auto p = wave_problem(10, 10);
    OptimizerConfig cfg;
    cfg.max_iterations = 2000;
    for (InterpMethod m : {InterpMethod::Multilinear, InterpMethod::Rbf}) {
        CascadeOptions opt;
        opt.method = m;
        const auto levels = cascade(p, {{8, 8}, {12, 12}, {16, 16}}, {2, 2}, cfg, opt);
        REQUIRE(levels.size() == 3);
        CHECK(levels[2].result.field.grid().n_x() == 16);
        CHECK(levels[0].cumulative_time <= levels[1].cumulative_time);
        CHECK(levels[1].cumulative_time <= levels[2].cumulative_time);
        for (const auto& l : levels) CHECK(l.result.mae_vs_reference.has_value());
    }
    CHECK_THROWS_AS((cascade(p, {{10, 10}, {10, 12}}, {2, 2}, cfg)), Error);
    CHECK(to_json(cascade(p, {{6, 6}, {9, 9}}, {2, 2}, cfg)).size() == 2);
}
