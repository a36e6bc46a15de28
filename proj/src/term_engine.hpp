#pragma once

// Shared machinery for evaluating encoded operators and their adjoints.
// Everything runs in long double: near a minimiser the gradient is a small
// difference of large stencil sums and double rounding swamps it.

#include "pdeopt/operator.hpp"
#include "pdeopt/stencil.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pdeopt::detail {

using Real = long double;
using Buffers = std::vector<std::vector<Real>>;

/// Distinct derivative multi-indices used by a problem, with their discrete
/// operators. Identity factors are stored like any other.
class FactorBank {
  public:
    FactorBank(const GridSpec& grid, SchemePolicy policy) : grid_(grid), policy_(policy) { policy.validate(); }

    int intern(Factor f);
    [[nodiscard]] std::size_t count() const noexcept { return factors_.size(); }
    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }

    /// values[id] = D_id u.
    void forward(std::span<const Real> u, Buffers& values, std::vector<Real>& scratch) const;
    /// grad += sum_id D_id^T seeds[id]; seeds are clobbered.
    void adjoint(Buffers& seeds, std::span<Real> grad, std::vector<Real>& scratch) const;

  private:
    const Stencil1D& stencil(Axis a);

    GridSpec grid_;
    SchemePolicy policy_;
    std::optional<Stencil1D> sx_, st_;
    std::vector<Factor> factors_;
};

struct CompiledTerm {
    bool constant_coeff = true;
    Real coeff = 1.0;
    std::vector<Real> coeff_field;
    std::vector<int> ids;
    int power = 1;

    [[nodiscard]] Real coefficient(std::size_t p) const noexcept { return constant_coeff ? coeff : coeff_field[p]; }
};

/// Sorts terms on their canonical JSON text so evaluation order does not
/// depend on the order the user listed them in.
std::vector<CompiledTerm> compile_terms(const std::vector<DiffTerm>& terms, FactorBank& bank);

inline Real ipow(Real v, int p) noexcept
{
    Real r = 1.0;
    for (int k = 0; k < p; ++k) r *= v;
    return r;
}

/// Sum of term values at flat index p.
inline Real eval_at(const std::vector<CompiledTerm>& terms, const Buffers& d, std::size_t p) noexcept
{
    Real acc = 0.0;
    for (const auto& t : terms) {
        Real prod = 1.0;
        for (int id : t.ids) prod *= d[id][p];
        acc += t.coefficient(p) * ipow(prod, t.power);
    }
    return acc;
}

/// seeds[id][p] += w * d(sum of terms)/d(D_id u)[p].
inline void seed_at(const std::vector<CompiledTerm>& terms, const Buffers& d, std::size_t p, Real w, Buffers& seeds) noexcept
{
    for (const auto& t : terms) {
        const Real c = w * t.coefficient(p);
        if (t.ids.size() == 1 && t.power == 1) {
            seeds[t.ids[0]][p] += c;
            continue;
        }
        Real prod = 1.0;
        for (int id : t.ids) prod *= d[id][p];
        const Real outer = c * t.power * ipow(prod, t.power - 1);
        for (std::size_t k = 0; k < t.ids.size(); ++k) {
            Real others = 1.0;
            for (std::size_t l = 0; l < t.ids.size(); ++l)
                if (l != k) others *= d[t.ids[l]][p];
            seeds[t.ids[k]][p] += outer * others;
        }
    }
}

} // namespace pdeopt::detail
