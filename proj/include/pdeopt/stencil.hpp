#pragma once

#include "pdeopt/grid.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pdeopt {

enum class Direction { Forward, Backward, Central };

/// One first-derivative formula. Order 2 is the two-point one-sided pair and its
/// average; order 4 is the three-point one-sided pair and its average.
struct StencilKind {
    Direction direction = Direction::Central;
    int order = 2;
};

/// Which formula applies where: `interior_order` for central points,
/// `boundary_order` for the one-sided band at each edge.
struct SchemePolicy {
    int interior_order = 2;
    int boundary_order = 2;

    /// Throws InvalidArgument unless both orders are 2 or 4.
    void validate() const;
    /// Points per edge that use one-sided stencils: 1 for boundary order 2,
    /// 2 for boundary order 4. An order-4 interior also needs 2.
    [[nodiscard]] std::size_t band_width() const noexcept;

    bool operator==(const SchemePolicy&) const = default;
};

struct PointClasses {
    std::vector<std::size_t> low;
    std::vector<std::size_t> interior;
    std::vector<std::size_t> high;
};

PointClasses classify_points(const GridSpec& spec, SchemePolicy policy, Axis axis);

/// Linear first-derivative operator along one axis of a grid, stored as one
/// short row of weights per grid line. Row i computes
/// (sum_k weights[k] * u[i + offset + k]) / h with k ascending, so results are
/// independent of how the caller schedules the rows.
class Stencil1D {
  public:
    struct Row {
        int offset = 0;
        int length = 0;
        std::array<double, 5> weights{};
    };

    /// Requested kind everywhere, with the mirrored one-sided formula of the same
    /// order wherever the requested one would leave the grid.
    static Stencil1D from_kind(std::size_t n, double h, StencilKind kind);
    /// Policy-driven operator: one-sided bands at the edges, central inside.
    static Stencil1D from_policy(std::size_t n, double h, SchemePolicy policy);

    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
    [[nodiscard]] const Row& row(std::size_t i) const noexcept { return rows_[i]; }
    [[nodiscard]] double step() const noexcept { return h_; }

    /// out = D u along `axis` for a row-major (n_x, n_t) buffer. Instantiated
    /// for double and long double.
    template <typename T>
    void apply(const GridSpec& g, Axis axis, std::span<const T> in, std::span<T> out) const;
    /// out = D^T v along `axis`; out is overwritten.
    template <typename T>
    void apply_transpose(const GridSpec& g, Axis axis, std::span<const T> in, std::span<T> out) const;

  private:
    Stencil1D(double h, std::vector<Row> rows) : h_(h), rows_(std::move(rows)) {}
    double h_;
    std::vector<Row> rows_;
};

Field first_derivative(const Field& field, Axis axis, StencilKind kind);

/// Applies the policy's first-derivative operator `order` times along `axis`.
Field derivative(const Field& field, Axis axis, int order, SchemePolicy policy);

/// Mixed derivative: d^{dx+dt} / dx^dx dt^dt, x passes first, then t passes.
Field derivative(const Field& field, int dx, int dt, SchemePolicy policy);

} // namespace pdeopt
