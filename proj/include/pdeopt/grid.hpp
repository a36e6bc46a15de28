#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pdeopt {

enum class Axis { X = 0, T = 1 };

/// Uniform rectangular mesh over [x_min, x_max] x [t_min, t_max].
///
/// Point counts include both endpoints, so the step along x is
/// (x_max - x_min) / (n_x - 1). Construction validates the spec; a GridSpec
/// that exists is always usable.
class GridSpec {
  public:
    /// Unit square, 3 x 3 points.
    GridSpec() : GridSpec(0.0, 1.0, 3, 0.0, 1.0, 3) {}
    GridSpec(double x_min, double x_max, std::size_t n_x, double t_min, double t_max, std::size_t n_t);

    [[nodiscard]] double x_min() const noexcept { return x_min_; }
    [[nodiscard]] double x_max() const noexcept { return x_max_; }
    [[nodiscard]] double t_min() const noexcept { return t_min_; }
    [[nodiscard]] double t_max() const noexcept { return t_max_; }
    [[nodiscard]] std::size_t n_x() const noexcept { return n_x_; }
    [[nodiscard]] std::size_t n_t() const noexcept { return n_t_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_x_ * n_t_; }
    [[nodiscard]] std::size_t count(Axis a) const noexcept { return a == Axis::X ? n_x_ : n_t_; }

    [[nodiscard]] double h_x() const noexcept { return (x_max_ - x_min_) / static_cast<double>(n_x_ - 1); }
    [[nodiscard]] double h_t() const noexcept { return (t_max_ - t_min_) / static_cast<double>(n_t_ - 1); }
    [[nodiscard]] double step(Axis a) const noexcept { return a == Axis::X ? h_x() : h_t(); }

    /// Endpoints are returned verbatim so the last node is exactly x_max.
    [[nodiscard]] double x(std::size_t i) const noexcept;
    [[nodiscard]] double t(std::size_t j) const noexcept;

    /// Row-major flat index: axis 0 is x, axis 1 is t.
    [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * n_t_ + j; }

    /// Same domain, different resolution.
    [[nodiscard]] GridSpec with_resolution(std::size_t n_x, std::size_t n_t) const;
    [[nodiscard]] bool same_domain(const GridSpec& other) const noexcept;

    /// Canonical text form, also used as the oracle cache key.
    [[nodiscard]] std::string to_string() const;

    bool operator==(const GridSpec&) const = default;

  private:
    double x_min_, x_max_, t_min_, t_max_;
    std::size_t n_x_, n_t_;
};

struct Coordinates {
    std::vector<double> x;
    std::vector<double> t;
};

Coordinates build_grid(const GridSpec& spec);

/// Immutable mesh function bound to a GridSpec. All entries are finite.
class Field {
  public:
    /// Throws ShapeMismatch if values.size() != grid.size() and NonFinite on NaN/Inf.
    Field(GridSpec grid, std::vector<double> values);

    static Field constant(const GridSpec& grid, double value);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return values_[grid_.index(i, j)]; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] double min() const noexcept;
    [[nodiscard]] double max() const noexcept;

    /// Moves the storage out, leaving the field empty. Used by code that recycles buffers.
    [[nodiscard]] std::vector<double> release() && { return std::move(values_); }

    bool operator==(const Field&) const = default;

  private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// xoshiro256** seeded through splitmix64. This is the generator behind every
/// random field; its output sequence is part of the reproducibility contract.
class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed) noexcept;
    std::uint64_t next() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t s_[4];
};

/// I.i.d. uniform entries on [lo, hi]; requires lo < hi.
Field random_field(const GridSpec& spec, std::uint64_t seed, double lo = 0.0, double hi = 1.0);

/// Mean absolute difference over all grid points.
double mae(const Field& a, const Field& b);

/// One line per x index, comma-separated t values, shortest round-trip decimals.
void write_csv(std::ostream& out, const Field& f);
Field read_csv(std::istream& in, const GridSpec& grid);

std::string format_double(double v);

} // namespace pdeopt
