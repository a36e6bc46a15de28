#include "pdeopt/stencil.hpp"

#include "pdeopt/error.hpp"

#include <algorithm>
#include <string>

namespace pdeopt {

namespace {

using Row = Stencil1D::Row;

Row forward_row(int order)
{
    if (order == 2) return {0, 2, {-1.0, 1.0}};
    return {0, 3, {-1.5, 2.0, -0.5}};
}

Row backward_row(int order)
{
    if (order == 2) return {-1, 2, {-1.0, 1.0}};
    return {-2, 3, {0.5, -2.0, 1.5}};
}

// Average of the forward and backward rows of the same order.
Row central_row(int order)
{
    if (order == 2) return {-1, 3, {-0.5, 0.0, 0.5}};
    return {-2, 5, {0.25, -1.0, 0.0, 1.0, -0.25}};
}

void check_order(int order)
{
    require(order == 2 || order == 4, ErrorCode::InvalidArgument,
            "stencil order must be 2 or 4, got " + std::to_string(order));
}

bool fits(const Row& r, std::size_t i, std::size_t n)
{
    const auto lo = static_cast<long>(i) + r.offset;
    return lo >= 0 && lo + r.length <= static_cast<long>(n);
}

} // namespace

void SchemePolicy::validate() const
{
    check_order(interior_order);
    check_order(boundary_order);
}

std::size_t SchemePolicy::band_width() const noexcept
{
    return (boundary_order == 4 || interior_order == 4) ? 2 : 1;
}

PointClasses classify_points(const GridSpec& spec, SchemePolicy policy, Axis axis)
{
    policy.validate();
    const std::size_t n = spec.count(axis);
    const std::size_t w = std::min(policy.band_width(), n / 2);
    PointClasses pc;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < w)
            pc.low.push_back(i);
        else if (i >= n - w)
            pc.high.push_back(i);
        else
            pc.interior.push_back(i);
    }
    return pc;
}

Stencil1D Stencil1D::from_kind(std::size_t n, double h, StencilKind kind)
{
    check_order(kind.order);
    const std::size_t min_n = (kind.order == 4 && kind.direction == Direction::Central) ? 5 : (kind.order == 4 ? 3 : 2);
    require(n >= min_n, ErrorCode::GridTooSmall,
            "axis has " + std::to_string(n) + " points, stencil needs " + std::to_string(min_n));
    std::vector<Row> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        Row r;
        switch (kind.direction) {
        case Direction::Forward: r = forward_row(kind.order); break;
        case Direction::Backward: r = backward_row(kind.order); break;
        case Direction::Central: r = central_row(kind.order); break;
        }
        if (!fits(r, i, n)) r = (2 * i < n) ? forward_row(kind.order) : backward_row(kind.order);
        rows[i] = r;
    }
    return {h, std::move(rows)};
}

Stencil1D Stencil1D::from_policy(std::size_t n, double h, SchemePolicy policy)
{
    policy.validate();
    const std::size_t w = policy.band_width();
    require(n >= 2 * w + 1, ErrorCode::GridTooSmall,
            "axis has " + std::to_string(n) + " points, scheme needs at least " + std::to_string(2 * w + 1));
    std::vector<Row> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < w)
            rows[i] = forward_row(policy.boundary_order);
        else if (i >= n - w)
            rows[i] = backward_row(policy.boundary_order);
        else
            rows[i] = central_row(policy.interior_order);
    }
    return {h, std::move(rows)};
}

template <typename T>
void Stencil1D::apply(const GridSpec& g, Axis axis, std::span<const T> in, std::span<T> out) const
{
    const std::size_t nx = g.n_x();
    const std::size_t nt = g.n_t();
    const T inv_h = T(1) / T(h_);
    if (axis == Axis::X) {
        for (std::size_t i = 0; i < nx; ++i) {
            const Row& r = rows_[i];
            T* o = out.data() + i * nt;
            std::fill(o, o + nt, T(0));
            for (int k = 0; k < r.length; ++k) {
                const T w = r.weights[k];
                if (w == 0.0) continue;
                const T* src = in.data() + (static_cast<long>(i) + r.offset + k) * static_cast<long>(nt);
                for (std::size_t j = 0; j < nt; ++j) o[j] += w * src[j];
            }
            for (std::size_t j = 0; j < nt; ++j) o[j] *= inv_h;
        }
    }
    else {
        for (std::size_t i = 0; i < nx; ++i) {
            const T* src = in.data() + i * nt;
            T* o = out.data() + i * nt;
            for (std::size_t j = 0; j < nt; ++j) {
                const Row& r = rows_[j];
                const T* s = src + static_cast<long>(j) + r.offset;
                T acc = 0;
                for (int k = 0; k < r.length; ++k) acc += T(r.weights[k]) * s[k];
                o[j] = acc * inv_h;
            }
        }
    }
}

template <typename T>
void Stencil1D::apply_transpose(const GridSpec& g, Axis axis, std::span<const T> in, std::span<T> out) const
{
    const std::size_t nx = g.n_x();
    const std::size_t nt = g.n_t();
    const T inv_h = T(1) / T(h_);
    std::fill(out.begin(), out.end(), T(0));
    if (axis == Axis::X) {
        for (std::size_t i = 0; i < nx; ++i) {
            const Row& r = rows_[i];
            const T* src = in.data() + i * nt;
            for (int k = 0; k < r.length; ++k) {
                const T w = T(r.weights[k]) * inv_h;
                if (w == 0.0) continue;
                T* o = out.data() + (static_cast<long>(i) + r.offset + k) * static_cast<long>(nt);
                for (std::size_t j = 0; j < nt; ++j) o[j] += w * src[j];
            }
        }
    }
    else {
        for (std::size_t i = 0; i < nx; ++i) {
            const T* src = in.data() + i * nt;
            T* o = out.data() + i * nt;
            for (std::size_t j = 0; j < nt; ++j) {
                const Row& r = rows_[j];
                const T v = src[j] * inv_h;
                T* d = o + static_cast<long>(j) + r.offset;
                for (int k = 0; k < r.length; ++k) d[k] += T(r.weights[k]) * v;
            }
        }
    }
}

template void Stencil1D::apply<double>(const GridSpec&, Axis, std::span<const double>, std::span<double>) const;
template void Stencil1D::apply<long double>(const GridSpec&, Axis, std::span<const long double>, std::span<long double>) const;
template void Stencil1D::apply_transpose<double>(const GridSpec&, Axis, std::span<const double>, std::span<double>) const;
template void Stencil1D::apply_transpose<long double>(const GridSpec&, Axis, std::span<const long double>,
                                                      std::span<long double>) const;

Field first_derivative(const Field& field, Axis axis, StencilKind kind)
{
    const auto& g = field.grid();
    const auto st = Stencil1D::from_kind(g.count(axis), g.step(axis), kind);
    std::vector<double> out(g.size());
    st.apply<double>(g, axis, field.values(), out);
    return {g, std::move(out)};
}

Field derivative(const Field& field, Axis axis, int order, SchemePolicy policy)
{
    return axis == Axis::X ? derivative(field, order, 0, policy) : derivative(field, 0, order, policy);
}

Field derivative(const Field& field, int dx, int dt, SchemePolicy policy)
{
    require(dx >= 0 && dt >= 0 && dx + dt >= 1, ErrorCode::InvalidArgument, "derivative order must be >= 1");
    const auto& g = field.grid();
    std::vector<double> cur(field.values().begin(), field.values().end());
    std::vector<double> next(g.size());
    auto pass = [&](Axis axis, int times) {
        if (times == 0) return;
        const auto st = Stencil1D::from_policy(g.count(axis), g.step(axis), policy);
        for (int k = 0; k < times; ++k) {
            st.apply<double>(g, axis, cur, next);
            cur.swap(next);
        }
    };
    pass(Axis::X, dx);
    pass(Axis::T, dt);
    return {g, std::move(cur)};
}

} // namespace pdeopt
