#pragma once

#include "pdeopt/functions.hpp"
#include "pdeopt/grid.hpp"
#include "pdeopt/stencil.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pdeopt {

/// Derivative multi-index d^{dx+dt}/dx^dx dt^dt; {0,0} is the field itself.
struct Factor {
    int dx = 0;
    int dt = 0;

    [[nodiscard]] bool is_identity() const noexcept { return dx == 0 && dt == 0; }
    auto operator<=>(const Factor&) const = default;
};

/// coefficient * (prod_k D_k u)^power. An empty factor list means u itself.
struct DiffTerm {
    GridFunction coefficient = GridFunction::constant(1.0);
    std::vector<Factor> factors;
    int power = 1;
};

/// L u = rhs, with L the pointwise sum of its terms.
struct OperatorSpec {
    std::vector<DiffTerm> terms;
    GridFunction rhs;
};

enum class Edge { XMin, XMax, TMin, TMax };

/// B u = target on every grid node of one edge. An empty term list is the
/// identity (Dirichlet) operator.
struct BoundaryCondition {
    Edge edge = Edge::XMin;
    std::vector<DiffTerm> terms;
    GridFunction target;

    [[nodiscard]] bool is_dirichlet() const noexcept { return terms.empty(); }
};

/// Ground truth used to grade a solve.
struct ReferenceSpec {
    enum class Kind { None, WaveExact, HeatOracle, Function };
    Kind kind = Kind::None;
    GridFunction function;
};

struct ProblemSpec {
    std::string name;
    GridSpec grid;
    OperatorSpec op{};
    std::vector<BoundaryCondition> boundary{};
    double lambda = 10.0;
    ReferenceSpec reference{};

    /// Throws InvalidArgument on empty operators, bad orders/powers or lambda <= 0.
    void validate() const;
    [[nodiscard]] ProblemSpec with_resolution(std::size_t n_x, std::size_t n_t) const;
};

/// Grid nodes of an edge as flat indices, ordered along the edge.
std::vector<std::size_t> edge_points(const GridSpec& grid, Edge edge);

/// Values of the discrete L u at every grid node (rhs not subtracted).
Field evaluate_operator(const OperatorSpec& op, const Field& field, SchemePolicy policy);

/// B u - g on the condition's edge, in edge order.
std::vector<double> evaluate_boundary(const BoundaryCondition& bc, const Field& field, SchemePolicy policy);

/// u_tt - u_xx/4 = 0 on [0,1]^2, u(0,t) = u(1,t) = 0, u(x,0) = u(x,1) = sin(pi x).
ProblemSpec wave_problem(std::size_t n_x = 10, std::size_t n_t = 10, double lambda = 10.0);
/// u_t - u_xx = 0 on [-8,8]x[0,10], u(+-8,t) = sin(pi t/10), u(x,0) = sin(pi x/8).
ProblemSpec heat_problem(std::size_t n_x = 10, std::size_t n_t = 10, double lambda = 10.0);

struct BuiltinProblems {
    ProblemSpec wave;
    ProblemSpec heat;
};
BuiltinProblems builtin_problems();

/// "wave" or "heat"; throws InvalidArgument otherwise.
ProblemSpec builtin_problem(const std::string& name, std::size_t n_x, std::size_t n_t, double lambda = 10.0);

nlohmann::json to_json(const ProblemSpec& p);
ProblemSpec problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DiffTerm& t);
DiffTerm term_from_json(const nlohmann::json& j);

} // namespace pdeopt
