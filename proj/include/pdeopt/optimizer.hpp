#pragma once

#include "pdeopt/grid.hpp"
#include "pdeopt/loss.hpp"
#include "pdeopt/operator.hpp"
#include "pdeopt/stencil.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pdeopt {

enum class Algorithm { Lbfgs, GradientDescent };
enum class Convergence { Gradient, Plateau, Budget };

std::string to_string(Convergence c);
std::string to_string(Algorithm a);

struct OptimizerConfig {
    /// 0 means 10 * number of grid points.
    long max_iterations = 0;
    /// Stop when max |grad| <= grad_tol.
    double grad_tol = 1e-6;
    /// Stop when |total[k - window] - total[k]| / max(1, total[k]) <= rel_loss_tol.
    double rel_loss_tol = 1e-9;
    int plateau_window = 10;
    /// Quasi-Newton memory (curvature pairs kept).
    int history_length = 10;
    /// Armijo constant c1 in f(x + a d) <= f(x) + c1 a g.d.
    double sufficient_decrease = 1e-4;
    /// Step shrink factor when a trial is rejected.
    double backtrack_factor = 0.5;
    int max_line_search_steps = 50;
    /// Try the minimiser of the quadratic through f(0), f'(0), f(a0) before
    /// settling for a0. Exact on quadratic objectives.
    bool interpolate_step = true;
    Algorithm algorithm = Algorithm::Lbfgs;
    /// Record every k-th iteration in loss_history (the final one always).
    int history_stride = 1;

    void validate() const;
    [[nodiscard]] long iteration_budget(std::size_t n_points) const noexcept;
};

nlohmann::json to_json(const OptimizerConfig& c);
/// Missing keys keep their defaults.
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

struct SolveResult {
    Field field;
    /// Entry 0 is the initial field; then one entry per recorded iteration.
    std::vector<LossBreakdown> loss_history{};
    std::vector<long> history_iterations{};
    LossBreakdown final_loss{};
    long iterations = 0;
    long evaluations = 0;
    long line_search_failures = 0;
    Convergence converged = Convergence::Budget;
    double wall_time = 0.0;
    std::optional<double> mae_vs_reference{};
};

/// Minimises the penalised residual objective from `init`.
///
/// Deterministic for identical inputs. Throws NonFinite when the initial loss
/// is not finite; line-search breakdowns are counted in the result and end
/// the solve with Convergence::Plateau.
SolveResult minimize(const ProblemSpec& problem, const Field& init, SchemePolicy policy, const OptimizerConfig& config,
                     const std::optional<Field>& reference = std::nullopt);

/// Field as nested arrays, history as [{interior, boundary, total}], plus counters.
nlohmann::json to_json(const SolveResult& r, bool include_field = true);

} // namespace pdeopt
