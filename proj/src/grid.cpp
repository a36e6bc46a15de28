#include "pdeopt/grid.hpp"

#include "pdeopt/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace pdeopt {

GridSpec::GridSpec(double x_min, double x_max, std::size_t n_x, double t_min, double t_max, std::size_t n_t)
    : x_min_(x_min), x_max_(x_max), t_min_(t_min), t_max_(t_max), n_x_(n_x), n_t_(n_t)
{
    require(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(t_min) && std::isfinite(t_max),
            ErrorCode::InvalidArgument, "grid bounds must be finite");
    require(n_x >= 3 && n_t >= 3, ErrorCode::InvalidArgument,
            "grid needs at least 3 points per axis, got " + std::to_string(n_x) + "x" + std::to_string(n_t));
    require(x_max > x_min && t_max > t_min, ErrorCode::InvalidArgument, "grid bounds are degenerate");
}

double GridSpec::x(std::size_t i) const noexcept
{
    if (i + 1 == n_x_) return x_max_;
    return x_min_ + static_cast<double>(i) * h_x();
}

double GridSpec::t(std::size_t j) const noexcept
{
    if (j + 1 == n_t_) return t_max_;
    return t_min_ + static_cast<double>(j) * h_t();
}

GridSpec GridSpec::with_resolution(std::size_t n_x, std::size_t n_t) const
{
    return {x_min_, x_max_, n_x, t_min_, t_max_, n_t};
}

bool GridSpec::same_domain(const GridSpec& o) const noexcept
{
    return x_min_ == o.x_min_ && x_max_ == o.x_max_ && t_min_ == o.t_min_ && t_max_ == o.t_max_;
}

std::string GridSpec::to_string() const
{
    return "x[" + format_double(x_min_) + "," + format_double(x_max_) + "," + std::to_string(n_x_) + "]t[" +
           format_double(t_min_) + "," + format_double(t_max_) + "," + std::to_string(n_t_) + "]";
}

Coordinates build_grid(const GridSpec& spec)
{
    Coordinates c;
    c.x.resize(spec.n_x());
    c.t.resize(spec.n_t());
    for (std::size_t i = 0; i < spec.n_x(); ++i) c.x[i] = spec.x(i);
    for (std::size_t j = 0; j < spec.n_t(); ++j) c.t[j] = spec.t(j);
    return c;
}

Field::Field(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    require(values_.size() == grid_.size(), ErrorCode::ShapeMismatch,
            "field has " + std::to_string(values_.size()) + " values, grid " + grid_.to_string() + " needs " +
                std::to_string(grid_.size()));
    require(std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }),
            ErrorCode::NonFinite, "field contains non-finite values");
}

Field Field::constant(const GridSpec& grid, double value)
{
    return {grid, std::vector<double>(grid.size(), value)};
}

double Field::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept
{
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

} // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept
{
    for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Xoshiro256::next() noexcept
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

Field random_field(const GridSpec& spec, std::uint64_t seed, double lo, double hi)
{
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, ErrorCode::InvalidArgument,
            "random_field needs lo < hi");
    Xoshiro256 rng(seed);
    std::vector<double> v(spec.size());
    for (auto& e : v) e = lo + (hi - lo) * rng.uniform();
    return {spec, std::move(v)};
}

double mae(const Field& a, const Field& b)
{
    require(a.grid().n_x() == b.grid().n_x() && a.grid().n_t() == b.grid().n_t(), ErrorCode::ShapeMismatch,
            "mae: shape mismatch");
    const auto va = a.values();
    const auto vb = b.values();
    double sum = 0.0;
    for (std::size_t k = 0; k < va.size(); ++k) sum += std::abs(va[k] - vb[k]);
    return sum / static_cast<double>(va.size());
}

std::string format_double(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

void write_csv(std::ostream& out, const Field& f)
{
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.n_x(); ++i) {
        for (std::size_t j = 0; j < g.n_t(); ++j) {
            if (j) out << ',';
            out << format_double(f(i, j));
        }
        out << '\n';
    }
}

Field read_csv(std::istream& in, const GridSpec& grid)
{
    std::vector<double> values;
    values.reserve(grid.size());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t cols = 0;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            auto end = line.find(',', pos);
            if (end == std::string::npos) end = line.size();
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, v);
            require(ec == std::errc{} && ptr == line.data() + end, ErrorCode::Io,
                    "bad number in field CSV row " + std::to_string(rows));
            values.push_back(v);
            ++cols;
            pos = end + 1;
        }
        require(cols == grid.n_t(), ErrorCode::ShapeMismatch, "field CSV row has wrong column count");
        ++rows;
    }
    require(rows == grid.n_x(), ErrorCode::ShapeMismatch, "field CSV has wrong row count");
    return {grid, std::move(values)};
}

} // namespace pdeopt
