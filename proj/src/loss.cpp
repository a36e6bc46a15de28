#include "pdeopt/loss.hpp"

#include "pdeopt/error.hpp"
#include "term_engine.hpp"

#include <algorithm>
#include <cmath>

namespace pdeopt {

nlohmann::json to_json(const LossBreakdown& l)
{
    return {{"interior", l.interior}, {"boundary", l.boundary}, {"total", l.total}};
}

namespace {

struct CompiledCondition {
    std::vector<std::size_t> points;
    std::vector<double> target;
    std::vector<detail::CompiledTerm> terms; // empty: identity
};

} // namespace

struct DiscreteProblem::Impl {
    GridSpec grid;
    SchemePolicy policy;
    double lambda;
    detail::FactorBank bank;
    std::vector<detail::CompiledTerm> terms;
    std::vector<detail::Real> rhs;
    std::vector<unsigned char> interior_mask; // empty: every point counts
    std::vector<CompiledCondition> conditions;

    // Scratch, reused across calls.
    mutable detail::Buffers d;
    mutable detail::Buffers seeds;
    mutable std::vector<detail::Real> scratch;
    mutable std::vector<detail::Real> residual;
    mutable std::vector<detail::Real> ext_u, ext_g;

    Impl(const ProblemSpec& p, SchemePolicy pol, LossOptions opt)
        : grid(p.grid), policy(pol), lambda(p.lambda), bank(p.grid, pol)
    {
        p.validate();
        terms = detail::compile_terms(p.op.terms, bank);
        const auto f = p.op.rhs.sample(grid);
        rhs.assign(f.values().begin(), f.values().end());
        if (!opt.include_boundary_bands) {
            const std::size_t w = pol.band_width();
            interior_mask.assign(grid.size(), 0);
            for (std::size_t i = w; i + w < grid.n_x(); ++i)
                for (std::size_t j = w; j + w < grid.n_t(); ++j) interior_mask[grid.index(i, j)] = 1;
        }
        for (const auto& bc : p.boundary) {
            CompiledCondition c;
            c.points = edge_points(grid, bc.edge);
            for (std::size_t pnt : c.points) {
                const double g = bc.target(grid.x(pnt / grid.n_t()), grid.t(pnt % grid.n_t()));
                require(std::isfinite(g), ErrorCode::NonFinite, "non-finite boundary target");
                c.target.push_back(g);
            }
            c.terms = detail::compile_terms(bc.terms, bank);
            conditions.push_back(std::move(c));
        }
    }

    struct Sums {
        detail::Real interior = 0, boundary = 0, total = 0;

        [[nodiscard]] LossBreakdown rounded() const
        {
            return {static_cast<double>(interior), static_cast<double>(boundary), static_cast<double>(total)};
        }
    };

    Sums run(std::span<const detail::Real> u, detail::Real* grad) const
    {
        using detail::Real;
        require(u.size() == grid.size(), ErrorCode::ShapeMismatch, "field size does not match problem grid");
        const std::size_t n = grid.size();
        bank.forward(u, d, scratch);
        if (grad) {
            seeds.resize(bank.count());
            for (auto& s : seeds) s.assign(n, 0.0L);
        }

        Sums out;
        residual.resize(n);
        for (std::size_t p = 0; p < n; ++p) residual[p] = detail::eval_at(terms, d, p) - rhs[p];
        for (std::size_t p = 0; p < n; ++p) {
            if (!interior_mask.empty() && !interior_mask[p]) continue;
            const Real r = residual[p];
            out.interior += r * r;
            if (grad) detail::seed_at(terms, d, p, 2 * r, seeds);
        }

        for (const auto& c : conditions) {
            for (std::size_t k = 0; k < c.points.size(); ++k) {
                const std::size_t p = c.points[k];
                if (c.terms.empty()) {
                    const Real r = u[p] - c.target[k];
                    out.boundary += r * r;
                    continue;
                }
                const Real r = detail::eval_at(c.terms, d, p) - c.target[k];
                out.boundary += r * r;
                if (grad) detail::seed_at(c.terms, d, p, 2 * lambda * r, seeds);
            }
        }
        out.total = out.interior + lambda * out.boundary;

        if (grad) {
            std::span<Real> g(grad, n);
            std::fill(g.begin(), g.end(), Real(0));
            bank.adjoint(seeds, g, scratch);
            // Dirichlet rows bypass the factor bank.
            for (const auto& c : conditions) {
                if (!c.terms.empty()) continue;
                for (std::size_t k = 0; k < c.points.size(); ++k) {
                    const std::size_t p = c.points[k];
                    g[p] += 2 * lambda * (u[p] - c.target[k]);
                }
            }
        }
        return out;
    }

    Sums run_double(std::span<const double> u, double* grad) const
    {
        require(u.size() == grid.size(), ErrorCode::ShapeMismatch, "field size does not match problem grid");
        ext_u.assign(u.begin(), u.end());
        if (!grad) return run(ext_u, nullptr);
        ext_g.resize(u.size());
        const Sums s = run(ext_u, ext_g.data());
        for (std::size_t p = 0; p < u.size(); ++p) grad[p] = static_cast<double>(ext_g[p]);
        return s;
    }
};

DiscreteProblem::DiscreteProblem(const ProblemSpec& problem, SchemePolicy policy, LossOptions options)
    : impl_(std::make_unique<Impl>(problem, policy, options))
{
}

DiscreteProblem::~DiscreteProblem() = default;
DiscreteProblem::DiscreteProblem(const DiscreteProblem& o) : impl_(std::make_unique<Impl>(*o.impl_)) {}
DiscreteProblem::DiscreteProblem(DiscreteProblem&&) noexcept = default;

const GridSpec& DiscreteProblem::grid() const noexcept { return impl_->grid; }
SchemePolicy DiscreteProblem::policy() const noexcept { return impl_->policy; }
double DiscreteProblem::lambda() const noexcept { return impl_->lambda; }

LossBreakdown DiscreteProblem::loss(std::span<const double> u) const { return impl_->run_double(u, nullptr).rounded(); }

LossBreakdown DiscreteProblem::loss_and_gradient(std::span<const double> u, std::span<double> grad) const
{
    require(grad.size() == impl_->grid.size(), ErrorCode::ShapeMismatch, "gradient buffer has wrong size");
    return impl_->run_double(u, grad.data()).rounded();
}

long double DiscreteProblem::loss_and_gradient(std::span<const long double> u, std::span<long double> grad,
                                               LossBreakdown* parts) const
{
    require(grad.size() == impl_->grid.size(), ErrorCode::ShapeMismatch, "gradient buffer has wrong size");
    const auto s = impl_->run(u, grad.data());
    if (parts) *parts = s.rounded();
    return s.total;
}

namespace {

void check_bound(const ProblemSpec& problem, const Field& field)
{
    require(field.grid() == problem.grid, ErrorCode::ShapeMismatch,
            "field grid " + field.grid().to_string() + " does not match problem grid " + problem.grid.to_string());
}

} // namespace

LossBreakdown loss(const ProblemSpec& problem, const Field& field, SchemePolicy policy, LossOptions options)
{
    check_bound(problem, field);
    return DiscreteProblem(problem, policy, options).loss(field.values());
}

Field gradient(const ProblemSpec& problem, const Field& field, SchemePolicy policy, LossOptions options)
{
    check_bound(problem, field);
    std::vector<double> g(field.size());
    DiscreteProblem(problem, policy, options).loss_and_gradient(field.values(), g);
    return {field.grid(), std::move(g)};
}

} // namespace pdeopt
