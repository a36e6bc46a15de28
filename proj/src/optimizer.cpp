#include "pdeopt/optimizer.hpp"

#include "pdeopt/error.hpp"
#include "pdeopt/reference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

namespace pdeopt {

using nlohmann::json;

std::string to_string(Convergence c)
{
    switch (c) {
    case Convergence::Gradient: return "gradient";
    case Convergence::Plateau: return "plateau";
    case Convergence::Budget: return "budget";
    }
    return "?";
}

std::string to_string(Algorithm a) { return a == Algorithm::Lbfgs ? "lbfgs" : "gradient_descent"; }

void OptimizerConfig::validate() const
{
    require(max_iterations >= 0, ErrorCode::InvalidArgument, "max_iterations must be >= 1 (or 0 for the default)");
    require(grad_tol > 0 && rel_loss_tol > 0, ErrorCode::InvalidArgument, "tolerances must be positive");
    require(plateau_window >= 1, ErrorCode::InvalidArgument, "plateau_window must be >= 1");
    require(history_length >= 1, ErrorCode::InvalidArgument, "history_length must be >= 1");
    require(sufficient_decrease > 0 && sufficient_decrease < 1, ErrorCode::InvalidArgument,
            "sufficient_decrease must be in (0, 1)");
    require(backtrack_factor > 0 && backtrack_factor < 1, ErrorCode::InvalidArgument, "backtrack_factor must be in (0, 1)");
    require(max_line_search_steps >= 1, ErrorCode::InvalidArgument, "max_line_search_steps must be >= 1");
    require(history_stride >= 1, ErrorCode::InvalidArgument, "history_stride must be >= 1");
}

long OptimizerConfig::iteration_budget(std::size_t n_points) const noexcept
{
    return max_iterations > 0 ? max_iterations : 10 * static_cast<long>(n_points);
}

json to_json(const OptimizerConfig& c)
{
    return {{"max_iterations", c.max_iterations},
            {"grad_tol", c.grad_tol},
            {"rel_loss_tol", c.rel_loss_tol},
            {"plateau_window", c.plateau_window},
            {"history_length", c.history_length},
            {"sufficient_decrease", c.sufficient_decrease},
            {"backtrack_factor", c.backtrack_factor},
            {"max_line_search_steps", c.max_line_search_steps},
            {"interpolate_step", c.interpolate_step},
            {"algorithm", to_string(c.algorithm)},
            {"history_stride", c.history_stride}};
}

OptimizerConfig optimizer_config_from_json(const json& j)
{
    require(j.is_object(), ErrorCode::InvalidArgument, "optimizer config must be an object");
    OptimizerConfig c;
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.grad_tol = j.value("grad_tol", c.grad_tol);
    c.rel_loss_tol = j.value("rel_loss_tol", c.rel_loss_tol);
    c.plateau_window = j.value("plateau_window", c.plateau_window);
    c.history_length = j.value("history_length", c.history_length);
    c.sufficient_decrease = j.value("sufficient_decrease", c.sufficient_decrease);
    c.backtrack_factor = j.value("backtrack_factor", c.backtrack_factor);
    c.max_line_search_steps = j.value("max_line_search_steps", c.max_line_search_steps);
    c.interpolate_step = j.value("interpolate_step", c.interpolate_step);
    c.history_stride = j.value("history_stride", c.history_stride);
    const auto alg = j.value("algorithm", std::string("lbfgs"));
    if (alg == "lbfgs")
        c.algorithm = Algorithm::Lbfgs;
    else if (alg == "gradient_descent")
        c.algorithm = Algorithm::GradientDescent;
    else
        fail(ErrorCode::InvalidArgument, "unknown algorithm '" + alg + "'");
    c.validate();
    return c;
}

namespace {

// Optimizer state is kept in long double. The wave problems are ill
// conditioned enough that rounding the iterate to double injects gradient
// noise comparable to the slow error modes, which stalls the quasi-Newton
// recursion long before the discrete minimiser is reached.
using Real = long double;
using Vec = std::vector<Real>;

Real dot(const Vec& a, const Vec& b)
{
    Real s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

Real max_abs(const Vec& a)
{
    Real m = 0;
    for (Real v : a) m = std::max(m, std::abs(v));
    return m;
}

/// Curvature pairs for the two-loop recursion.
class LbfgsMemory {
  public:
    explicit LbfgsMemory(std::size_t capacity) : capacity_(capacity) {}

    void clear() { pairs_.clear(); }
    [[nodiscard]] bool empty() const noexcept { return pairs_.empty(); }

    void push(Vec s, Vec y)
    {
        const Real sy = dot(s, y);
        const Real yy = dot(y, y);
        if (!(sy > 1e-12L * yy) || yy == 0) return;
        if (pairs_.size() == capacity_) pairs_.pop_front();
        pairs_.push_back({std::move(s), std::move(y), 1 / sy, sy / yy});
    }

    /// d = -H g.
    void direction(const Vec& g, Vec& d)
    {
        d = g;
        alpha_.resize(pairs_.size());
        for (std::size_t k = pairs_.size(); k-- > 0;) {
            const auto& p = pairs_[k];
            alpha_[k] = p.rho * dot(p.s, d);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha_[k] * p.y[i];
        }
        const Real gamma = pairs_.back().gamma;
        for (Real& v : d) v *= gamma;
        for (std::size_t k = 0; k < pairs_.size(); ++k) {
            const auto& p = pairs_[k];
            const Real beta = p.rho * dot(p.y, d);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += (alpha_[k] - beta) * p.s[i];
        }
        for (Real& v : d) v = -v;
    }

  private:
    struct Pair {
        Vec s, y;
        Real rho, gamma;
    };
    std::size_t capacity_;
    std::deque<Pair> pairs_;
    std::vector<Real> alpha_;
};

struct Point {
    Real alpha = 0;
    Real total = 0;
    LossBreakdown parts;
    Vec x, g;
    bool ok = false;
};

} // namespace

SolveResult minimize(const ProblemSpec& problem, const Field& init, SchemePolicy policy, const OptimizerConfig& config,
                     const std::optional<Field>& reference)
{
    config.validate();
    require(init.grid() == problem.grid, ErrorCode::ShapeMismatch,
            "initial field grid " + init.grid().to_string() + " does not match problem grid " + problem.grid.to_string());
    const auto t0 = std::chrono::steady_clock::now();
    const DiscreteProblem dp(problem, policy);
    const std::size_t n = init.size();
    const long budget = config.iteration_budget(n);
    const Real c1 = config.sufficient_decrease;

    Vec x(init.values().begin(), init.values().end());
    Vec g(n), d(n), x_trial(n), g_trial(n);

    SolveResult res{.field = init};
    LossBreakdown parts;
    Real f = dp.loss_and_gradient(x, g, &parts);
    res.evaluations = 1;
    require(std::isfinite(f), ErrorCode::NonFinite, "loss is not finite at the initial field");
    res.loss_history.push_back(parts);
    res.history_iterations.push_back(0);

    LbfgsMemory memory(static_cast<std::size_t>(config.history_length));
    std::deque<Real> window{f};
    Real prev_alpha = 0;
    int consecutive_failures = 0;
    bool memory_reset_used = false;
    res.converged = Convergence::Budget;

    auto evaluate = [&](Real alpha, LossBreakdown& out) {
        for (std::size_t i = 0; i < n; ++i) x_trial[i] = x[i] + alpha * d[i];
        ++res.evaluations;
        return dp.loss_and_gradient(x_trial, g_trial, &out);
    };
    auto steepest = [&] {
        d = g;
        for (Real& v : d) v = -v;
    };

    if (max_abs(g) <= config.grad_tol) res.converged = Convergence::Gradient;

    while (res.converged == Convergence::Budget && res.iterations < budget) {
        if (config.algorithm == Algorithm::GradientDescent || memory.empty())
            steepest();
        else
            memory.direction(g, d);
        Real slope = dot(g, d);
        if (!(slope < 0)) {
            memory.clear();
            steepest();
            slope = dot(g, d);
        }

        Real alpha = 1;
        if (memory.empty())
            alpha = prev_alpha > 0 && config.algorithm == Algorithm::GradientDescent ? 2 * prev_alpha : 1 / std::sqrt(-slope);

        // Backtracking on f(x + alpha d). On the first trial the secant on the
        // directional derivative proposes a second step; it is exact for
        // quadratics and preferred whenever it satisfies the Armijo test.
        Point best;
        auto accept = [&](Real a, Real ft, const LossBreakdown& pt) {
            best.alpha = a;
            best.total = ft;
            best.parts = pt;
            best.x = x_trial;
            best.g = g_trial;
            best.ok = true;
        };
        for (int step = 0; step < config.max_line_search_steps; ++step) {
            LossBreakdown pt;
            const Real ft = evaluate(alpha, pt);
            const bool finite = std::isfinite(ft);
            if (finite && ft <= f + c1 * alpha * slope) accept(alpha, ft, pt);
            if (config.interpolate_step && finite && step == 0) {
                const Real curv = dot(g_trial, d) - slope;
                if (curv > 0) {
                    const Real aq = -slope * alpha / curv;
                    if (aq != alpha) {
                        LossBreakdown pq;
                        const Real fq = evaluate(aq, pq);
                        if (std::isfinite(fq) && fq <= f + c1 * aq * slope) accept(aq, fq, pq);
                    }
                }
            }
            if (best.ok) break;
            Real next = alpha * config.backtrack_factor;
            if (finite) {
                const Real curv = ft - f - slope * alpha;
                if (curv > 0) next = std::max(next, std::min(alpha / 2, -slope * alpha * alpha / (2 * curv)));
            }
            alpha = next;
        }

        if (!best.ok) {
            ++res.line_search_failures;
            if (++consecutive_failures >= 3) {
                if (memory_reset_used) {
                    res.converged = Convergence::Plateau;
                    break;
                }
                memory_reset_used = true;
                consecutive_failures = 0;
            }
            memory.clear();
            continue;
        }
        consecutive_failures = 0;
        prev_alpha = best.alpha;

        Vec s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = best.x[i] - x[i];
            y[i] = best.g[i] - g[i];
        }
        x.swap(best.x);
        g.swap(best.g);
        f = best.total;
        parts = best.parts;
        if (config.algorithm == Algorithm::Lbfgs) memory.push(std::move(s), std::move(y));
        ++res.iterations;

        if (res.iterations % config.history_stride == 0) {
            res.loss_history.push_back(parts);
            res.history_iterations.push_back(res.iterations);
        }

        window.push_back(f);
        if (window.size() > static_cast<std::size_t>(config.plateau_window) + 1) window.pop_front();

        if (max_abs(g) <= config.grad_tol)
            res.converged = Convergence::Gradient;
        else if (window.size() == static_cast<std::size_t>(config.plateau_window) + 1 &&
                 std::abs(window.front() - f) / std::max<Real>(1, f) <= config.rel_loss_tol)
            res.converged = Convergence::Plateau;
    }

    if (res.history_iterations.back() != res.iterations) {
        res.loss_history.push_back(parts);
        res.history_iterations.push_back(res.iterations);
    }
    res.final_loss = parts;
    res.field = Field(problem.grid, std::vector<double>(x.begin(), x.end()));
    if (reference) res.mae_vs_reference = mae(res.field, *reference);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

json to_json(const SolveResult& r, bool include_field)
{
    json hist = json::array();
    for (std::size_t k = 0; k < r.loss_history.size(); ++k) {
        json e = to_json(r.loss_history[k]);
        e["iteration"] = r.history_iterations[k];
        hist.push_back(e);
    }
    json j = {{"iterations", r.iterations},
              {"evaluations", r.evaluations},
              {"line_search_failures", r.line_search_failures},
              {"converged", to_string(r.converged)},
              {"wall_time_s", r.wall_time},
              {"final_loss", to_json(r.final_loss)},
              {"mae", r.mae_vs_reference ? json(*r.mae_vs_reference) : json(nullptr)},
              {"grid",
               {{"x", json::array({r.field.grid().x_min(), r.field.grid().x_max(), r.field.grid().n_x()})},
                {"t", json::array({r.field.grid().t_min(), r.field.grid().t_max(), r.field.grid().n_t()})}}},
              {"loss_history", hist}};
    if (include_field) {
        json rows = json::array();
        const auto& g = r.field.grid();
        for (std::size_t i = 0; i < g.n_x(); ++i) {
            json row = json::array();
            for (std::size_t jj = 0; jj < g.n_t(); ++jj) row.push_back(r.field(i, jj));
            rows.push_back(row);
        }
        j["field"] = rows;
    }
    return j;
}

} // namespace pdeopt
