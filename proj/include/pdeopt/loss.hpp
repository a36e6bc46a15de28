#pragma once

#include "pdeopt/grid.hpp"
#include "pdeopt/operator.hpp"
#include "pdeopt/stencil.hpp"

#include <json.hpp>

#include <memory>
#include <span>

namespace pdeopt {

/// interior = sum (L u - f)^2, boundary = sum (B u - g)^2, total = interior + lambda * boundary.
struct LossBreakdown {
    double interior = 0.0;
    double boundary = 0.0;
    double total = 0.0;

    bool operator==(const LossBreakdown&) const = default;
};

nlohmann::json to_json(const LossBreakdown& l);

struct LossOptions {
    /// When false, the interior sum skips the one-sided bands along both axes.
    bool include_boundary_bands = true;
};

/// A problem compiled on its grid for one scheme policy: stencils built,
/// coefficients/rhs/targets sampled once. Evaluation reuses internal scratch
/// buffers, so one instance must not be evaluated from two threads at once;
/// copies are independent.
class DiscreteProblem {
  public:
    DiscreteProblem(const ProblemSpec& problem, SchemePolicy policy, LossOptions options = {});
    ~DiscreteProblem();
    DiscreteProblem(const DiscreteProblem&);
    DiscreteProblem(DiscreteProblem&&) noexcept;
    DiscreteProblem& operator=(const DiscreteProblem&) = delete;
    DiscreteProblem& operator=(DiscreteProblem&&) = delete;

    [[nodiscard]] const GridSpec& grid() const noexcept;
    [[nodiscard]] SchemePolicy policy() const noexcept;
    [[nodiscard]] double lambda() const noexcept;

    [[nodiscard]] LossBreakdown loss(std::span<const double> u) const;
    /// Overwrites grad with d(total)/du.
    LossBreakdown loss_and_gradient(std::span<const double> u, std::span<double> grad) const;

    /// Same evaluation without rounding the state, gradient or total to double.
    /// `parts` (optional) receives the rounded breakdown.
    long double loss_and_gradient(std::span<const long double> u, std::span<long double> grad,
                                  LossBreakdown* parts = nullptr) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

LossBreakdown loss(const ProblemSpec& problem, const Field& field, SchemePolicy policy, LossOptions options = {});
Field gradient(const ProblemSpec& problem, const Field& field, SchemePolicy policy, LossOptions options = {});

} // namespace pdeopt
