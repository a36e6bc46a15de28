#include "pdeopt/reference.hpp"

#include "pdeopt/error.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pdeopt {

using std::numbers::pi;

double wave_exact_value(double x, double t) noexcept
{
    return std::sin(pi * x) * (std::cos(pi * t / 2.0) + std::sin(pi * t / 2.0));
}

Field wave_exact(const GridSpec& spec) { return GridFunction::wave_exact().sample(spec); }

namespace {

// Thomas algorithm for a constant-coefficient tridiagonal system
// (sub = sup = off, diagonal = diag); rhs is overwritten with the solution.
void solve_tridiagonal(double diag, double off, std::vector<double>& rhs, std::vector<double>& c)
{
    const std::size_t n = rhs.size();
    c.resize(n);
    c[0] = off / diag;
    rhs[0] /= diag;
    for (std::size_t i = 1; i < n; ++i) {
        const double m = diag - off * c[i - 1];
        c[i] = off / m;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

} // namespace

Field heat_crank_nicolson(const GridSpec& spec, int refinement)
{
    require(refinement >= 1, ErrorCode::InvalidArgument, "refinement must be >= 1");
    require(spec.x_min() == -8.0 && spec.x_max() == 8.0 && spec.t_min() == 0.0 && spec.t_max() == 10.0,
            ErrorCode::InvalidArgument, "heat oracle needs the grid [-8,8]x[0,10], got " + spec.to_string());
    const auto r = static_cast<std::size_t>(refinement);
    const GridSpec fine = spec.with_resolution(r * (spec.n_x() - 1) + 1, r * (spec.n_t() - 1) + 1);
    const std::size_t m = fine.n_x();
    const double h = fine.h_x();
    const double dt = fine.h_t();
    const double mu = dt / (h * h);
    auto boundary = [](double t) { return std::sin(pi * t / 10.0); };

    std::vector<double> u(m);
    for (std::size_t i = 0; i < m; ++i) u[i] = std::sin(pi * fine.x(i) / 8.0);
    u.front() = u.back() = boundary(0.0);

    std::vector<double> out(spec.size());
    auto store = [&](std::size_t step) {
        if (step % r) return;
        const std::size_t j = step / r;
        for (std::size_t i = 0; i < spec.n_x(); ++i) out[spec.index(i, j)] = u[i * r];
    };
    store(0);

    std::vector<double> rhs(m - 2), work;
    for (std::size_t step = 1; step < fine.n_t(); ++step) {
        const double b_new = boundary(fine.t(step));
        for (std::size_t i = 1; i + 1 < m; ++i) rhs[i - 1] = u[i] + 0.5 * mu * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
        rhs.front() += 0.5 * mu * b_new;
        rhs.back() += 0.5 * mu * b_new;
        solve_tridiagonal(1.0 + mu, -0.5 * mu, rhs, work);
        u[0] = b_new;
        u[m - 1] = b_new;
        for (std::size_t i = 1; i + 1 < m; ++i) u[i] = rhs[i - 1];
        store(step);
    }
    return {spec, std::move(out)};
}

HeatOracleResult heat_oracle_checked(const GridSpec& spec, HeatOracleOptions options)
{
    require(options.refinement >= 1, ErrorCode::InvalidArgument, "refinement must be >= 1");
    Field coarse = heat_crank_nicolson(spec, options.refinement);
    Field fine = heat_crank_nicolson(spec, 2 * options.refinement);
    const double change = mae(coarse, fine);
    if (!(change <= options.gate_tolerance)) {
        std::ostringstream msg;
        msg << "heat oracle rejected on " << spec.to_string() << ": refinement changed the field by " << change
            << " MAE (gate " << options.gate_tolerance << ")";
        fail(ErrorCode::OracleRejected, msg.str());
    }
    return {std::move(fine), change};
}

Field heat_oracle(const GridSpec& spec, HeatOracleOptions options) { return heat_oracle_checked(spec, options).field; }

namespace {

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

Field heat_oracle_cached(const GridSpec& spec, const std::filesystem::path& dir, HeatOracleOptions options)
{
    std::ostringstream key;
    key << spec.to_string() << "|r" << options.refinement << "|g" << format_double(options.gate_tolerance);
    std::ostringstream name;
    name << "heat_oracle_" << std::hex << fnv1a(key.str()) << ".csv";
    const auto path = dir / name.str();
    if (std::ifstream in(path); in) return read_csv(in, spec);
    Field f = heat_oracle(spec, options);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::Io, "cannot write oracle cache " + path.string());
    write_csv(out, f);
    return f;
}

std::optional<Field> reference_field(const ProblemSpec& problem)
{
    switch (problem.reference.kind) {
    case ReferenceSpec::Kind::None: return std::nullopt;
    case ReferenceSpec::Kind::WaveExact: return wave_exact(problem.grid);
    case ReferenceSpec::Kind::HeatOracle: return heat_oracle(problem.grid);
    case ReferenceSpec::Kind::Function: return problem.reference.function.sample(problem.grid);
    }
    return std::nullopt;
}

} // namespace pdeopt
