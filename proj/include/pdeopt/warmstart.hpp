#pragma once

#include "pdeopt/grid.hpp"
#include "pdeopt/operator.hpp"
#include "pdeopt/optimizer.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pdeopt {

enum class InterpMethod { Multilinear, Rbf };

std::string to_string(InterpMethod m);
/// Accepts "multilinear"/"interp"/"interpn"/"cascade" and "rbf".
InterpMethod parse_interp_method(const std::string& s);

/// Bilinear interpolation of `coarse` onto the nodes of `fine_spec`.
/// Reproduces coarse values at coincident nodes and never leaves
/// [min(coarse), max(coarse)].
Field interp_multilinear(const Field& coarse, const GridSpec& fine_spec);

/// Radial-basis interpolation with the linear kernel phi(r) = r over all
/// coarse nodes plus a constant term:
///   [A - smooth I, 1; 1^T, 0] [w; c] = [y; 0],  A_ij = |p_i - p_j|.
/// Solved densely; throws SingularSystem when the factorisation breaks down.
Field interp_rbf(const Field& coarse, const GridSpec& fine_spec, double smooth = 10.0);

Field interpolate(const Field& coarse, const GridSpec& fine_spec, InterpMethod method, double rbf_smooth = 10.0);

struct CascadeOptions {
    InterpMethod method = InterpMethod::Multilinear;
    double rbf_smooth = 10.0;
    std::uint64_t seed = 0;
    /// Range of the random first-level field.
    double init_lo = 0.0;
    double init_hi = 1.0;
    /// Reference used for each level's MAE; reference_field when unset.
    std::function<std::optional<Field>(const ProblemSpec&)> reference;
};

struct CascadeLevel {
    SolveResult result;
    /// Seconds since the cascade started, including interpolation time.
    double cumulative_time = 0.0;
};

/// Solves `problem` at each resolution in turn. The first level starts from a
/// random field, each later level from the previous solution interpolated
/// onto its grid. Resolutions must be strictly increasing on both axes.
std::vector<CascadeLevel> cascade(const ProblemSpec& problem, const std::vector<std::pair<std::size_t, std::size_t>>& resolutions,
                                  SchemePolicy policy, const OptimizerConfig& config, const CascadeOptions& options = {});

/// The default level schedule: start, start + step, ... up to and including `last`.
std::vector<std::size_t> cascade_schedule(std::size_t start, std::size_t step, std::size_t last);

nlohmann::json to_json(const std::vector<CascadeLevel>& levels);

} // namespace pdeopt
