#pragma once

#include "pdeopt/grid.hpp"
#include "pdeopt/operator.hpp"

#include <filesystem>
#include <optional>

namespace pdeopt {

/// sin(pi x) (cos(pi t / 2) + sin(pi t / 2)): separable solution of the builtin wave problem.
double wave_exact_value(double x, double t) noexcept;
Field wave_exact(const GridSpec& spec);

struct HeatOracleOptions {
    /// Reference mesh is this many times finer than the target grid on both axes.
    int refinement = 4;
    /// Maximum MAE change, on the target nodes, when the reference mesh is refined twice more.
    double gate_tolerance = 1e-4;
};

struct HeatOracleResult {
    Field field;
    /// MAE between the restrictions of the refinement and 2*refinement solutions.
    double refinement_change = 0.0;
};

/// Crank-Nicolson solution of u_t = u_xx with the builtin heat data, computed
/// on a refined mesh and restricted to the nodes of `spec`. Throws
/// OracleRejected if the refinement gate fails. `spec` must cover [-8,8]x[0,10].
HeatOracleResult heat_oracle_checked(const GridSpec& spec, HeatOracleOptions options = {});
Field heat_oracle(const GridSpec& spec, HeatOracleOptions options = {});

/// Crank-Nicolson solve at exactly `refinement` times the resolution of `spec`, restricted, no gate.
Field heat_crank_nicolson(const GridSpec& spec, int refinement);

/// heat_oracle with a CSV cache in `dir`, keyed by a hash of the grid spec.
Field heat_oracle_cached(const GridSpec& spec, const std::filesystem::path& dir, HeatOracleOptions options = {});

/// Reference field of a problem on its own grid, or nothing if the problem has none.
std::optional<Field> reference_field(const ProblemSpec& problem);

} // namespace pdeopt
