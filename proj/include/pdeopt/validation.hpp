#pragma once

#include "pdeopt/operator.hpp"
#include "pdeopt/stencil.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace pdeopt {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

nlohmann::json to_json(const CheckResult& c);

/// Largest |analytic - fd| / (1 + |analytic|) over all coordinates, where fd
/// is the central difference of the loss with step `step`, evaluated without
/// rounding the perturbed field to double.
double gradient_check(const ProblemSpec& problem, const Field& field, SchemePolicy policy, double step = 1e-6);

/// Max error of the policy's second derivative (two first-derivative passes)
/// of sin(pi x) on [0,1], over points both passes treat as interior, for
/// each n in `sizes`.
std::vector<double> second_derivative_errors(const std::vector<std::size_t>& sizes, SchemePolicy policy = {});

/// log2 of successive error ratios; meaningful when each size halves h.
std::vector<double> convergence_rates(const std::vector<double>& errors);

/// Max error of the order-4 forward and backward first derivatives on
/// u = x^2 + 3x + 1 over every node of an n-point grid on [-1, 2].
double order4_quadratic_error(std::size_t n = 17);

struct ValidationOptions {
    int gradient_cases = 24;
    std::uint64_t seed = 0;
    double gradient_tol = 1e-5;
    std::vector<std::size_t> rate_sizes{11, 21, 41, 81};
    double rate_lo = 1.9;
    double rate_hi = 2.1;
    double exact_tol = 1e-10;
    /// Heat grids whose oracle must pass the refinement gate.
    std::vector<std::size_t> heat_sizes{20, 30, 40, 50};
};

/// Gradient oracle, stencil order sweep, order-4 exactness and the heat
/// oracle refinement gate.
std::vector<CheckResult> run_validation(const ValidationOptions& options = {});

} // namespace pdeopt
