#include "pdeopt/validation.hpp"

#include "pdeopt/error.hpp"
#include "pdeopt/loss.hpp"
#include "pdeopt/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pdeopt {

nlohmann::json to_json(const CheckResult& c)
{
    return {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}, {"detail", c.detail}};
}

double gradient_check(const ProblemSpec& problem, const Field& field, SchemePolicy policy, double step)
{
    require(field.grid() == problem.grid, ErrorCode::ShapeMismatch, "field does not match problem grid");
    require(step > 0.0, ErrorCode::InvalidArgument, "finite-difference step must be positive");
    const DiscreteProblem dp(problem, policy);
    const std::size_t n = field.size();
    std::vector<long double> u(field.values().begin(), field.values().end());
    std::vector<long double> g(n), scratch(n);
    dp.loss_and_gradient(u, g);

    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const long double keep = u[k];
        u[k] = keep + step;
        const long double fp = dp.loss_and_gradient(u, scratch);
        u[k] = keep - step;
        const long double fm = dp.loss_and_gradient(u, scratch);
        u[k] = keep;
        const long double fd = (fp - fm) / (2.0L * step);
        worst = std::max(worst, static_cast<double>(std::abs(g[k] - fd) / (1.0L + std::abs(g[k]))));
    }
    return worst;
}

std::vector<double> second_derivative_errors(const std::vector<std::size_t>& sizes, SchemePolicy policy)
{
    policy.validate();
    const double pi = std::numbers::pi;
    const std::size_t w = policy.band_width();
    std::vector<double> errors;
    for (std::size_t n : sizes) {
        const GridSpec g(0.0, 1.0, n, 0.0, 1.0, 3);
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 3; ++j) v[g.index(i, j)] = std::sin(pi * g.x(i));
        const Field d2 = derivative(Field(g, std::move(v)), Axis::X, 2, policy);
        double worst = 0.0;
        for (std::size_t i = 2 * w; i + 2 * w < n; ++i)
            worst = std::max(worst, std::abs(d2(i, 1) + pi * pi * std::sin(pi * g.x(i))));
        errors.push_back(worst);
    }
    return errors;
}

std::vector<double> convergence_rates(const std::vector<double>& errors)
{
    std::vector<double> rates;
    for (std::size_t k = 1; k < errors.size(); ++k) rates.push_back(std::log2(errors[k - 1] / errors[k]));
    return rates;
}

double order4_quadratic_error(std::size_t n)
{
    const GridSpec g(-1.0, 2.0, n, 0.0, 1.0, 3);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const double x = g.x(i);
            v[g.index(i, j)] = x * x + 3.0 * x + 1.0;
        }
    const Field u(g, std::move(v));
    double worst = 0.0;
    for (Direction dir : {Direction::Forward, Direction::Backward}) {
        const Field d = first_derivative(u, Axis::X, {dir, 4});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(d(i, j) - (2.0 * g.x(i) + 3.0)));
    }
    return worst;
}

namespace {

std::string join(const std::vector<double>& v)
{
    std::ostringstream os;
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? " " : "") << format_double(v[k]);
    return os.str();
}

} // namespace

std::vector<CheckResult> run_validation(const ValidationOptions& o)
{
    std::vector<CheckResult> out;

    {
        Xoshiro256 rng(o.seed);
        const std::vector<std::string> problems{"wave", "heat"};
        const std::vector<SchemePolicy> policies{{2, 2}, {2, 4}, {4, 4}};
        double worst = 0.0;
        std::string where;
        for (int c = 0; c < o.gradient_cases; ++c) {
            const auto& name = problems[static_cast<std::size_t>(c) % problems.size()];
            const SchemePolicy pol = policies[static_cast<std::size_t>(c / 2) % policies.size()];
            const std::size_t nx = 7 + rng.next() % 6;
            const std::size_t nt = 7 + rng.next() % 6;
            const auto p = builtin_problem(name, nx, nt);
            const double e = gradient_check(p, random_field(p.grid, rng.next()), pol);
            if (e >= worst) {
                worst = e;
                where = name + " " + p.grid.to_string() + " policy (" + std::to_string(pol.interior_order) + "," +
                        std::to_string(pol.boundary_order) + ")";
            }
        }
        out.push_back({"gradient_oracle", worst <= o.gradient_tol, worst, o.gradient_tol,
                       std::to_string(o.gradient_cases) + " cases, worst at " + where});
    }

    {
        const auto errs = second_derivative_errors(o.rate_sizes);
        const auto rates = convergence_rates(errs);
        const bool ok = !rates.empty() &&
                        std::all_of(rates.begin(), rates.end(), [&](double r) { return r >= o.rate_lo && r <= o.rate_hi; });
        const double lo = rates.empty() ? 0.0 : *std::min_element(rates.begin(), rates.end());
        out.push_back({"second_derivative_rate", ok, lo, o.rate_lo,
                       "errors " + join(errs) + "; rates " + join(rates) + "; band [" + format_double(o.rate_lo) + ", " +
                           format_double(o.rate_hi) + "]"});
    }

    {
        const double e = order4_quadratic_error();
        out.push_back({"order4_one_sided_quadratic", e <= o.exact_tol, e, o.exact_tol, "forward and backward, all nodes"});
    }

    for (std::size_t n : o.heat_sizes) {
        const auto p = builtin_problem("heat", n, n);
        CheckResult c{"heat_oracle_gate_" + std::to_string(n), false, 0.0, HeatOracleOptions{}.gate_tolerance, ""};
        try {
            const auto r = heat_oracle_checked(p.grid);
            c.value = r.refinement_change;
            c.passed = r.refinement_change <= c.threshold;
            c.detail = "MAE change under x2 refinement";
        }
        catch (const Error& e) {
            c.detail = e.what();
        }
        out.push_back(c);
    }
    return out;
}

} // namespace pdeopt
