#include "pdeopt/warmstart.hpp"

#include "pdeopt/error.hpp"
#include "pdeopt/reference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace pdeopt {

std::string to_string(InterpMethod m) { return m == InterpMethod::Multilinear ? "multilinear" : "rbf"; }

InterpMethod parse_interp_method(const std::string& s)
{
    if (s == "multilinear" || s == "interp" || s == "interpn" || s == "cascade") return InterpMethod::Multilinear;
    if (s == "rbf") return InterpMethod::Rbf;
    fail(ErrorCode::InvalidArgument, "unknown interpolation method '" + s + "'");
}

namespace {

void check_domains(const Field& coarse, const GridSpec& fine)
{
    require(coarse.grid().same_domain(fine), ErrorCode::InvalidArgument,
            "interpolation domain mismatch: " + coarse.grid().to_string() + " vs " + fine.to_string());
}

// Cell index and weight of `v` on a uniform axis with `n` nodes from `lo` with step `h`.
std::pair<std::size_t, double> locate(double v, double lo, double h, std::size_t n)
{
    const double s = (v - lo) / h;
    auto k = static_cast<long>(std::floor(s));
    k = std::clamp<long>(k, 0, static_cast<long>(n) - 2);
    double w = s - static_cast<double>(k);
    w = std::clamp(w, 0.0, 1.0);
    // Snap weights that are within rounding of a node so coincident nodes copy exactly.
    if (std::abs(w) < 1e-12) w = 0.0;
    if (std::abs(w - 1.0) < 1e-12) w = 1.0;
    return {static_cast<std::size_t>(k), w};
}

} // namespace

Field interp_multilinear(const Field& coarse, const GridSpec& fine)
{
    check_domains(coarse, fine);
    const auto& cg = coarse.grid();
    std::vector<double> out(fine.size());
    for (std::size_t i = 0; i < fine.n_x(); ++i) {
        const auto [ci, wx] = locate(fine.x(i), cg.x_min(), cg.h_x(), cg.n_x());
        for (std::size_t j = 0; j < fine.n_t(); ++j) {
            const auto [cj, wt] = locate(fine.t(j), cg.t_min(), cg.h_t(), cg.n_t());
            double v = 0.0;
            if (wx < 1.0 && wt < 1.0) v += (1.0 - wx) * (1.0 - wt) * coarse(ci, cj);
            if (wx > 0.0 && wt < 1.0) v += wx * (1.0 - wt) * coarse(ci + 1, cj);
            if (wx < 1.0 && wt > 0.0) v += (1.0 - wx) * wt * coarse(ci, cj + 1);
            if (wx > 0.0 && wt > 0.0) v += wx * wt * coarse(ci + 1, cj + 1);
            out[fine.index(i, j)] = v;
        }
    }
    return {fine, std::move(out)};
}

Field interp_rbf(const Field& coarse, const GridSpec& fine, double smooth)
{
    check_domains(coarse, fine);
    require(std::isfinite(smooth) && smooth >= 0.0, ErrorCode::InvalidArgument, "rbf smooth must be >= 0");
    const auto& cg = coarse.grid();
    const Eigen::Index m = static_cast<Eigen::Index>(cg.size());

    std::vector<double> px(cg.size()), pt(cg.size());
    for (std::size_t i = 0; i < cg.n_x(); ++i)
        for (std::size_t j = 0; j < cg.n_t(); ++j) {
            px[cg.index(i, j)] = cg.x(i);
            pt[cg.index(i, j)] = cg.t(j);
        }

    Eigen::MatrixXd a(m + 1, m + 1);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) a(r, c) = std::hypot(px[r] - px[c], pt[r] - pt[c]);
        a(r, r) -= smooth;
        a(r, m) = 1.0;
        a(m, r) = 1.0;
    }
    a(m, m) = 0.0;
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index r = 0; r < m; ++r) rhs(r) = coarse.values()[static_cast<std::size_t>(r)];
    rhs(m) = 0.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd sol = lu.solve(rhs);
    const double resid = (a * sol - rhs).norm();
    require(sol.allFinite() && resid <= 1e-8 * (1.0 + rhs.norm()), ErrorCode::SingularSystem,
            "rbf system is singular or badly conditioned");

    std::vector<double> out(fine.size());
    for (std::size_t i = 0; i < fine.n_x(); ++i)
        for (std::size_t j = 0; j < fine.n_t(); ++j) {
            const double x = fine.x(i);
            const double t = fine.t(j);
            double v = sol(m);
            for (Eigen::Index k = 0; k < m; ++k) v += sol(k) * std::hypot(x - px[k], t - pt[k]);
            out[fine.index(i, j)] = v;
        }
    return {fine, std::move(out)};
}

Field interpolate(const Field& coarse, const GridSpec& fine_spec, InterpMethod method, double rbf_smooth)
{
    return method == InterpMethod::Multilinear ? interp_multilinear(coarse, fine_spec)
                                               : interp_rbf(coarse, fine_spec, rbf_smooth);
}

std::vector<std::size_t> cascade_schedule(std::size_t start, std::size_t step, std::size_t last)
{
    require(step >= 1, ErrorCode::InvalidArgument, "cascade step must be >= 1");
    std::vector<std::size_t> out;
    for (std::size_t n = start; n < last; n += step) out.push_back(n);
    out.push_back(last);
    return out;
}

std::vector<CascadeLevel> cascade(const ProblemSpec& problem, const std::vector<std::pair<std::size_t, std::size_t>>& resolutions,
                                  SchemePolicy policy, const OptimizerConfig& config, const CascadeOptions& options)
{
    require(!resolutions.empty(), ErrorCode::InvalidArgument, "cascade needs at least one resolution");
    for (std::size_t k = 1; k < resolutions.size(); ++k)
        require(resolutions[k].first > resolutions[k - 1].first && resolutions[k].second > resolutions[k - 1].second,
                ErrorCode::InvalidArgument, "cascade resolutions must be strictly increasing");

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CascadeLevel> levels;
    for (std::size_t k = 0; k < resolutions.size(); ++k) {
        const auto level = problem.with_resolution(resolutions[k].first, resolutions[k].second);
        try {
            Field init = k == 0 ? random_field(level.grid, options.seed, options.init_lo, options.init_hi)
                                : interpolate(levels.back().result.field, level.grid, options.method, options.rbf_smooth);
            auto res = minimize(level, init, policy, config, options.reference ? options.reference(level) : reference_field(level));
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            levels.push_back({std::move(res), elapsed});
        }
        catch (const Error& e) {
            throw Error(e.code(), "cascade level " + std::to_string(k) + " (" + level.grid.to_string() + "): " + e.what());
        }
    }
    return levels;
}

nlohmann::json to_json(const std::vector<CascadeLevel>& levels)
{
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto& r = levels[k].result;
        arr.push_back({{"level", k},
                       {"n_x", r.field.grid().n_x()},
                       {"n_t", r.field.grid().n_t()},
                       {"iterations", r.iterations},
                       {"converged", to_string(r.converged)},
                       {"mae", r.mae_vs_reference ? nlohmann::json(*r.mae_vs_reference) : nlohmann::json(nullptr)},
                       {"final_loss", to_json(r.final_loss)},
                       {"wall_time_s", r.wall_time},
                       {"cumulative_time_s", levels[k].cumulative_time}});
    }
    return arr;
}

} // namespace pdeopt
