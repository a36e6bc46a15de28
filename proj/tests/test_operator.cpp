#include "pdeopt/error.hpp"
#include "pdeopt/operator.hpp"
#include "pdeopt/reference.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pdeopt;

namespace {

DiffTerm term(double c, std::vector<Factor> f, int power = 1)
{
    return DiffTerm{GridFunction::constant(c), std::move(f), power};
}

Field sample(const GridSpec& g, auto fn)
{
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_t(); ++j) v[g.index(i, j)] = fn(g.x(i), g.t(j));
    return Field(g, std::move(v));
}

std::vector<double> copy(const Field& f) { return {f.values().begin(), f.values().end()}; }

double interior_max_abs(const Field& f, std::size_t skip)
{
    const auto& g = f.grid();
    double m = 0.0;
    for (std::size_t i = skip; i + skip < g.n_x(); ++i)
        for (std::size_t j = skip; j + skip < g.n_t(); ++j) m = std::max(m, std::abs(f(i, j)));
    return m;
}

} // namespace

TEST_CASE("first-derivative operator on a linear field")
{
    const GridSpec g(0.0, 1.0, 8, 0.0, 1.0, 6);
    const Field u = sample(g, [](double x, double) { return x; });
    for (SchemePolicy p : {SchemePolicy{2, 2}, SchemePolicy{2, 4}, SchemePolicy{4, 4}}) {
        const OperatorSpec op{{term(1.0, {{1, 0}})}, GridFunction::constant(0.0)};
        for (double v : copy(evaluate_operator(op, u, p))) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        const OperatorSpec sq{{term(1.0, {{1, 0}}, 2)}, GridFunction::constant(0.0)};
        for (double v : copy(evaluate_operator(sq, u, p))) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("powers and products of factors")
{
    const GridSpec g(0.0, 1.0, 6, 0.0, 2.0, 7);
    // u = 2x + 3t: u_x * u_t = 6, (u)^2 identity factor, 3 * u_t^3 = 81.
    const Field u = sample(g, [](double x, double t) { return 2.0 * x + 3.0 * t; });
    const OperatorSpec prod{{term(1.0, {{1, 0}, {0, 1}})}, {}};
    for (double v : copy(evaluate_operator(prod, u, {2, 2}))) CHECK(v == doctest::Approx(6.0).epsilon(1e-12));
    const OperatorSpec cube{{term(3.0, {{0, 1}}, 3)}, {}};
    for (double v : copy(evaluate_operator(cube, u, {2, 4}))) CHECK(v == doctest::Approx(81.0).epsilon(1e-12));
    const OperatorSpec ident{{term(1.0, {}, 2)}, {}};
    const Field sq = evaluate_operator(ident, u, {2, 2});
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(sq.values()[k] == doctest::Approx(u.values()[k] * u.values()[k]));
}

TEST_CASE("variable coefficients are sampled on the grid")
{
    const GridSpec g(0.0, 1.0, 5, 0.0, 1.0, 5);
    const Field u = sample(g, [](double x, double) { return x; });
    const OperatorSpec op{{DiffTerm{GridFunction::affine(1.0, 2.0, 0.0), {{1, 0}}, 1}}, {}};
    const Field r = evaluate_operator(op, u, {2, 2});
    for (std::size_t i = 0; i < 5; ++i) CHECK(r(i, 3) == doctest::Approx(1.0 + 2.0 * g.x(i)).epsilon(1e-12));
}

TEST_CASE("wave residual of the closed-form solution decays at second order")
{
    const auto op = wave_problem().op;
    std::vector<double> errs;
    for (std::size_t n : {21u, 41u, 81u}) {
        const auto p = wave_problem(n, n);
        const Field r = evaluate_operator(op, wave_exact(p.grid), {2, 2});
        errs.push_back(interior_max_abs(r, 2));
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
        const double rate = std::log2(errs[k - 1] / errs[k]);
        CHECK(rate > 1.8);
        CHECK(rate < 2.2);
    }
    // Truncation bound: h^2/3 |u_tttt| + h^2/12 |u_xxxx| with |u| <= sqrt(2).
    const double bound = std::sqrt(2.0) * std::pow(std::numbers::pi, 4) * (1.0 / 48.0 + 1.0 / 12.0) / (80.0 * 80.0);
    CHECK(errs.back() <= bound);
}

TEST_CASE("wave Dirichlet rows vanish on the sampled closed form")
{
    const auto p = wave_problem(17, 13);
    const Field u = wave_exact(p.grid);
    REQUIRE(p.boundary.size() == 4);
    for (const auto& bc : p.boundary) {
        CHECK(bc.is_dirichlet());
        for (double r : evaluate_boundary(bc, u, {2, 2})) CHECK(std::abs(r) <= 1e-12);
    }
}

TEST_CASE("boundary residual examples")
{
    const GridSpec g(0.0, 1.0, 6, 0.0, 1.0, 5);
    const BoundaryCondition dir{Edge::XMin, {}, GridFunction::constant(0.0)};
    for (double r : evaluate_boundary(dir, Field::constant(g, 0.0), {2, 2})) CHECK(r == 0.0);
    CHECK(evaluate_boundary(dir, Field::constant(g, 0.0), {2, 2}).size() == 5);

    const BoundaryCondition neu{Edge::XMin, {term(1.0, {{1, 0}})}, GridFunction::constant(0.0)};
    for (SchemePolicy p : {SchemePolicy{2, 2}, SchemePolicy{2, 4}})
        for (double r : evaluate_boundary(neu, Field::constant(g, 3.25), p)) CHECK(std::abs(r) <= 1e-14);

    const BoundaryCondition top{Edge::TMax, {}, GridFunction::constant(1.0)};
    const auto res = evaluate_boundary(top, Field::constant(g, 0.5), {2, 2});
    CHECK(res.size() == 6);
    for (double r : res) CHECK(r == -0.5);
}

TEST_CASE("edge point sets")
{
    const GridSpec g(0.0, 1.0, 4, 0.0, 1.0, 3);
    CHECK(edge_points(g, Edge::XMin) == std::vector<std::size_t>{0, 1, 2});
    CHECK(edge_points(g, Edge::XMax) == std::vector<std::size_t>{9, 10, 11});
    CHECK(edge_points(g, Edge::TMin) == std::vector<std::size_t>{0, 3, 6, 9});
    CHECK(edge_points(g, Edge::TMax) == std::vector<std::size_t>{2, 5, 8, 11});
}

TEST_CASE("builtin problem domains and data")
{
    const auto b = builtin_problems();
    CHECK(b.wave.grid.x_min() == 0.0);
    CHECK(b.wave.grid.x_max() == 1.0);
    CHECK(b.wave.grid.t_min() == 0.0);
    CHECK(b.wave.grid.t_max() == 1.0);
    CHECK(b.heat.grid.x_min() == -8.0);
    CHECK(b.heat.grid.x_max() == 8.0);
    CHECK(b.heat.grid.t_min() == 0.0);
    CHECK(b.heat.grid.t_max() == 10.0);

    const BoundaryCondition* ic = nullptr;
    for (const auto& bc : b.heat.boundary)
        if (bc.edge == Edge::TMin) ic = &bc;
    REQUIRE(ic != nullptr);
    CHECK(ic->target(4.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b.heat.boundary.size() == 3);
    CHECK(b.wave.lambda == 10.0);
    CHECK_THROWS_AS((builtin_problem("poisson", 10, 10)), Error);
}

TEST_CASE("problem JSON round trip is exact")
{
    for (const auto& p : {wave_problem(9, 7, 3.5), heat_problem(6, 8)}) {
        const auto j = to_json(p);
        const auto q = problem_from_json(j);
        CHECK(to_json(q) == j);
        CHECK(q.grid == p.grid);
        CHECK(q.lambda == p.lambda);
        const Field u = random_field(p.grid, 4);
        const Field a = evaluate_operator(p.op, u, {2, 4}), b = evaluate_operator(q.op, u, {2, 4});
        CHECK(a == b);
    }
}

TEST_CASE("problem JSON accepts neumann, operator and mixed factors")
{
    const auto j = nlohmann::json::parse(R"({
      "grid": {"x": [0, 1, 6], "t": [0, 1, 5]},
      "operator": {"terms": [{"coeff": 1, "factors": [{"x": 1, "t": 1}]}], "rhs": 1},
      "boundary": [
        {"edge": "x_min", "kind": "neumann", "target": 0},
        {"edge": "t_min", "kind": "operator", "terms": [{"coeff": 2, "factors": [["t", 1]]}], "target": 0},
        {"edge": "x_max"}
      ],
      "reference": {"fn": "affine", "a": 0, "bx": 0, "bt": 0}
    })");
    const auto p = problem_from_json(j);
    CHECK(p.boundary.size() == 3);
    CHECK_FALSE(p.boundary[0].is_dirichlet());
    CHECK(p.boundary[2].is_dirichlet());
    CHECK(p.reference.kind == ReferenceSpec::Kind::Function);
    const Field u = sample(p.grid, [](double x, double t) { return x * t; });
    for (double v : copy(evaluate_operator(p.op, u, {2, 2}))) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(problem_from_json(to_json(p)).boundary.size() == 3);

    auto bad = j;
    bad["boundary"][0]["kind"] = "robin";
    CHECK_THROWS_AS((problem_from_json(bad)), Error);
    bad = j;
    bad["lambda"] = -1.0;
    CHECK_THROWS_AS((problem_from_json(bad)), Error);
    bad = j;
    bad["operator"]["terms"][0]["power"] = 0;
    CHECK_THROWS_AS((problem_from_json(bad)), Error);
}

TEST_CASE("operator evaluation does not depend on term order")
{
    const GridSpec g(0.0, 1.0, 9, 0.0, 1.0, 8);
    const Field u = random_field(g, 12);
    DiffTerm a = term(0.7, {{2, 0}}), b = term(-1.3, {{0, 1}, {1, 0}}), c = term(2.0, {}, 3);
    const OperatorSpec one{{a, b, c}, {}}, two{{c, a, b}, {}};
    CHECK(evaluate_operator(one, u, {2, 4}) == evaluate_operator(two, u, {2, 4}));
}

TEST_CASE("linear operators are linear")
{
    const auto p = wave_problem(9, 9);
    const Field u = random_field(p.grid, 1), v = random_field(p.grid, 2);
    std::vector<double> w(u.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = 2.0 * u.values()[k] - 0.5 * v.values()[k];
    const Field lu = evaluate_operator(p.op, u, {2, 2}), lv = evaluate_operator(p.op, v, {2, 2});
    const Field lw = evaluate_operator(p.op, Field(p.grid, w), {2, 2});
    for (std::size_t k = 0; k < w.size(); ++k)
        CHECK(lw.values()[k] == doctest::Approx(2.0 * lu.values()[k] - 0.5 * lv.values()[k]).epsilon(1e-10));
}

TEST_CASE("grid functions evaluate and round trip")
{
    const double pi = std::numbers::pi;
    const auto s = GridFunction::sin_scaled(Axis::X, pi, 2.0, 0.5);
    CHECK(s(0.25, 9.0) == doctest::Approx(2.0 * std::sin(pi * 0.25 + 0.5)));
    const auto e = GridFunction::exp_scaled(Axis::T, -0.5, 3.0);
    CHECK(e(1.0, 2.0) == doctest::Approx(3.0 * std::exp(-1.0)));
    const auto pr = GridFunction::product({GridFunction::poly(Axis::X, {1.0, 0.0, 2.0}), GridFunction::constant(3.0)});
    CHECK(pr(2.0, 0.0) == doctest::Approx(27.0));
    const auto sm = GridFunction::sum({GridFunction::cos_scaled(Axis::T, pi), GridFunction::affine(1.0, 1.0, 1.0)});
    CHECK(sm(1.0, 1.0) == doctest::Approx(2.0));
    for (const auto& f : {s, e, pr, sm, GridFunction::wave_exact()}) {
        const auto back = GridFunction::from_json(f.to_json());
        CHECK(back(0.3, 0.7) == f(0.3, 0.7));
    }
    CHECK_THROWS_AS(static_cast<void>(GridFunction::exp_scaled(Axis::X, 1000.0).sample(GridSpec(0.0, 1.0, 3, 0.0, 1.0, 3))), Error);
}
