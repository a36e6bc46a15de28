#include "pdeopt/operator.hpp"

#include "pdeopt/error.hpp"
#include "term_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pdeopt {

using nlohmann::json;

namespace detail {

const Stencil1D& FactorBank::stencil(Axis a)
{
    auto& slot = a == Axis::X ? sx_ : st_;
    if (!slot) slot = Stencil1D::from_policy(grid_.count(a), grid_.step(a), policy_);
    return *slot;
}

int FactorBank::intern(Factor f)
{
    require(f.dx >= 0 && f.dt >= 0, ErrorCode::InvalidArgument, "negative derivative order");
    if (f.dx > 0) stencil(Axis::X);
    if (f.dt > 0) stencil(Axis::T);
    auto it = std::find(factors_.begin(), factors_.end(), f);
    if (it != factors_.end()) return static_cast<int>(it - factors_.begin());
    factors_.push_back(f);
    return static_cast<int>(factors_.size() - 1);
}

void FactorBank::forward(std::span<const Real> u, Buffers& values, std::vector<Real>& scratch) const
{
    const std::size_t n = grid_.size();
    values.resize(factors_.size());
    scratch.resize(n);
    for (std::size_t id = 0; id < factors_.size(); ++id) {
        const Factor f = factors_[id];
        auto& out = values[id];
        out.assign(u.begin(), u.end());
        for (int k = 0; k < f.dx; ++k) {
            sx_->apply<Real>(grid_, Axis::X, out, scratch);
            out.swap(scratch);
        }
        for (int k = 0; k < f.dt; ++k) {
            st_->apply<Real>(grid_, Axis::T, out, scratch);
            out.swap(scratch);
        }
    }
}

void FactorBank::adjoint(Buffers& seeds, std::span<Real> grad, std::vector<Real>& scratch) const
{
    scratch.resize(grid_.size());
    for (std::size_t id = 0; id < factors_.size(); ++id) {
        const Factor f = factors_[id];
        auto& s = seeds[id];
        for (int k = 0; k < f.dt; ++k) {
            st_->apply_transpose<Real>(grid_, Axis::T, s, scratch);
            s.swap(scratch);
        }
        for (int k = 0; k < f.dx; ++k) {
            sx_->apply_transpose<Real>(grid_, Axis::X, s, scratch);
            s.swap(scratch);
        }
        for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += s[p];
    }
}

std::vector<CompiledTerm> compile_terms(const std::vector<DiffTerm>& terms, FactorBank& bank)
{
    std::vector<std::pair<std::string, const DiffTerm*>> keyed;
    keyed.reserve(terms.size());
    for (const auto& t : terms) keyed.emplace_back(to_json(t).dump(), &t);
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<CompiledTerm> out;
    for (const auto& [key, t] : keyed) {
        require(t->power >= 1, ErrorCode::InvalidArgument, "term power must be >= 1");
        CompiledTerm c;
        c.power = t->power;
        if (t->coefficient.is_constant()) {
            c.coeff = t->coefficient.constant_value();
            require(std::isfinite(c.coeff), ErrorCode::NonFinite, "non-finite term coefficient");
        }
        else {
            c.constant_coeff = false;
            const auto sampled = t->coefficient.sample(bank.grid());
            c.coeff_field.assign(sampled.values().begin(), sampled.values().end());
        }
        if (t->factors.empty()) c.ids.push_back(bank.intern(Factor{}));
        for (const auto& f : t->factors) {
            require(!f.is_identity() || t->factors.size() == 1, ErrorCode::InvalidArgument,
                    "identity factor mixed with derivative factors");
            c.ids.push_back(bank.intern(f));
        }
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace detail

void ProblemSpec::validate() const
{
    require(!op.terms.empty(), ErrorCode::InvalidArgument, "operator has no terms");
    require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
    auto check_terms = [](const std::vector<DiffTerm>& terms) {
        for (const auto& t : terms) {
            require(t.power >= 1, ErrorCode::InvalidArgument, "term power must be >= 1");
            for (const auto& f : t.factors)
                require(f.dx >= 0 && f.dt >= 0 && f.dx + f.dt >= 1, ErrorCode::InvalidArgument,
                        "factor derivative order must be >= 1");
        }
    };
    check_terms(op.terms);
    for (const auto& bc : boundary) check_terms(bc.terms);
}

ProblemSpec ProblemSpec::with_resolution(std::size_t n_x, std::size_t n_t) const
{
    ProblemSpec p = *this;
    p.grid = grid.with_resolution(n_x, n_t);
    return p;
}

std::vector<std::size_t> edge_points(const GridSpec& g, Edge edge)
{
    std::vector<std::size_t> pts;
    switch (edge) {
    case Edge::XMin:
    case Edge::XMax: {
        const std::size_t i = edge == Edge::XMin ? 0 : g.n_x() - 1;
        for (std::size_t j = 0; j < g.n_t(); ++j) pts.push_back(g.index(i, j));
        break;
    }
    case Edge::TMin:
    case Edge::TMax: {
        const std::size_t j = edge == Edge::TMin ? 0 : g.n_t() - 1;
        for (std::size_t i = 0; i < g.n_x(); ++i) pts.push_back(g.index(i, j));
        break;
    }
    }
    return pts;
}

Field evaluate_operator(const OperatorSpec& op, const Field& field, SchemePolicy policy)
{
    require(!op.terms.empty(), ErrorCode::InvalidArgument, "operator has no terms");
    detail::FactorBank bank(field.grid(), policy);
    const auto terms = detail::compile_terms(op.terms, bank);
    detail::Buffers d;
    std::vector<detail::Real> scratch;
    const std::vector<detail::Real> u(field.values().begin(), field.values().end());
    bank.forward(u, d, scratch);
    std::vector<double> out(field.size());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = static_cast<double>(detail::eval_at(terms, d, p));
    return {field.grid(), std::move(out)};
}

std::vector<double> evaluate_boundary(const BoundaryCondition& bc, const Field& field, SchemePolicy policy)
{
    const auto& g = field.grid();
    const auto pts = edge_points(g, bc.edge);
    std::vector<double> res(pts.size());
    if (bc.is_dirichlet()) {
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const std::size_t p = pts[k];
            res[k] = field.values()[p] - bc.target(g.x(p / g.n_t()), g.t(p % g.n_t()));
        }
        return res;
    }
    detail::FactorBank bank(g, policy);
    const auto terms = detail::compile_terms(bc.terms, bank);
    detail::Buffers d;
    std::vector<detail::Real> scratch;
    const std::vector<detail::Real> u(field.values().begin(), field.values().end());
    bank.forward(u, d, scratch);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const std::size_t p = pts[k];
        res[k] = static_cast<double>(detail::eval_at(terms, d, p) - bc.target(g.x(p / g.n_t()), g.t(p % g.n_t())));
    }
    return res;
}

namespace {

DiffTerm term(double coeff, std::vector<Factor> factors, int power = 1)
{
    return {GridFunction::constant(coeff), std::move(factors), power};
}

} // namespace

ProblemSpec wave_problem(std::size_t n_x, std::size_t n_t, double lambda)
{
    using std::numbers::pi;
    ProblemSpec p{.name = "wave", .grid = GridSpec(0.0, 1.0, n_x, 0.0, 1.0, n_t)};
    p.op.terms = {term(1.0, {Factor{0, 2}}), term(-0.25, {Factor{2, 0}})};
    p.op.rhs = GridFunction::constant(0.0);
    const auto sx = GridFunction::sin_scaled(Axis::X, pi);
    p.boundary = {
        {Edge::XMin, {}, GridFunction::constant(0.0)},
        {Edge::XMax, {}, GridFunction::constant(0.0)},
        {Edge::TMin, {}, sx},
        {Edge::TMax, {}, sx},
    };
    p.lambda = lambda;
    p.reference.kind = ReferenceSpec::Kind::WaveExact;
    p.validate();
    return p;
}

ProblemSpec heat_problem(std::size_t n_x, std::size_t n_t, double lambda)
{
    using std::numbers::pi;
    ProblemSpec p{.name = "heat", .grid = GridSpec(-8.0, 8.0, n_x, 0.0, 10.0, n_t)};
    p.op.terms = {term(1.0, {Factor{0, 1}}), term(-1.0, {Factor{2, 0}})};
    p.op.rhs = GridFunction::constant(0.0);
    const auto st = GridFunction::sin_scaled(Axis::T, pi / 10.0);
    p.boundary = {
        {Edge::XMin, {}, st},
        {Edge::XMax, {}, st},
        {Edge::TMin, {}, GridFunction::sin_scaled(Axis::X, pi / 8.0)},
    };
    p.lambda = lambda;
    p.reference.kind = ReferenceSpec::Kind::HeatOracle;
    p.validate();
    return p;
}

BuiltinProblems builtin_problems() { return {wave_problem(), heat_problem()}; }

ProblemSpec builtin_problem(const std::string& name, std::size_t n_x, std::size_t n_t, double lambda)
{
    if (name == "wave") return wave_problem(n_x, n_t, lambda);
    if (name == "heat") return heat_problem(n_x, n_t, lambda);
    fail(ErrorCode::InvalidArgument, "unknown builtin problem '" + name + "' (expected wave or heat)");
}

// ---- JSON -----------------------------------------------------------------

namespace {

const char* edge_name(Edge e)
{
    switch (e) {
    case Edge::XMin: return "x_min";
    case Edge::XMax: return "x_max";
    case Edge::TMin: return "t_min";
    case Edge::TMax: return "t_max";
    }
    return "?";
}

Edge parse_edge(const json& j)
{
    const auto s = j.get<std::string>();
    for (Edge e : {Edge::XMin, Edge::XMax, Edge::TMin, Edge::TMax})
        if (s == edge_name(e)) return e;
    fail(ErrorCode::InvalidArgument, "unknown edge '" + s + "' (expected x_min, x_max, t_min or t_max)");
}

json factor_to_json(Factor f)
{
    if (f.dt == 0) return json::array({"x", f.dx});
    if (f.dx == 0) return json::array({"t", f.dt});
    return {{"x", f.dx}, {"t", f.dt}};
}

Factor factor_from_json(const json& j)
{
    Factor f;
    if (j.is_array()) {
        require(j.size() == 2 && j[1].is_number_integer(), ErrorCode::InvalidArgument, "factor must be [axis, order]");
        const int order = j[1].get<int>();
        require(order >= 1, ErrorCode::InvalidArgument, "factor derivative order must be >= 1");
        (parse_axis(j[0]) == Axis::X ? f.dx : f.dt) = order;
        return f;
    }
    require(j.is_object(), ErrorCode::InvalidArgument, "factor must be [axis, order] or {\"x\":i,\"t\":j}");
    f.dx = j.value("x", 0);
    f.dt = j.value("t", 0);
    require(f.dx >= 0 && f.dt >= 0 && f.dx + f.dt >= 1, ErrorCode::InvalidArgument, "factor derivative order must be >= 1");
    return f;
}

json grid_to_json(const GridSpec& g)
{
    return {{"x", json::array({g.x_min(), g.x_max(), g.n_x()})}, {"t", json::array({g.t_min(), g.t_max(), g.n_t()})}};
}

GridSpec grid_from_json(const json& j)
{
    auto axis = [&](const char* k) {
        require(j.contains(k) && j.at(k).is_array() && j.at(k).size() == 3, ErrorCode::InvalidArgument,
                std::string("grid.") + k + " must be [min, max, n]");
        return j.at(k);
    };
    const auto& x = axis("x");
    const auto& t = axis("t");
    require(x[2].is_number_integer() && t[2].is_number_integer(), ErrorCode::InvalidArgument, "grid point counts must be integers");
    const auto nx = x[2].get<long>();
    const auto nt = t[2].get<long>();
    require(nx > 0 && nt > 0, ErrorCode::InvalidArgument, "grid point counts must be positive");
    return {x[0].get<double>(), x[1].get<double>(), static_cast<std::size_t>(nx),
            t[0].get<double>(), t[1].get<double>(), static_cast<std::size_t>(nt)};
}

json terms_to_json(const std::vector<DiffTerm>& terms)
{
    json arr = json::array();
    for (const auto& t : terms) arr.push_back(to_json(t));
    return arr;
}

std::vector<DiffTerm> terms_from_json(const json& j)
{
    require(j.is_array(), ErrorCode::InvalidArgument, "terms must be an array");
    std::vector<DiffTerm> out;
    for (const auto& t : j) out.push_back(term_from_json(t));
    return out;
}

} // namespace

json to_json(const DiffTerm& t)
{
    json factors = json::array();
    for (const auto& f : t.factors) factors.push_back(factor_to_json(f));
    return {{"coeff", t.coefficient.to_json()}, {"factors", factors}, {"power", t.power}};
}

DiffTerm term_from_json(const json& j)
{
    require(j.is_object(), ErrorCode::InvalidArgument, "term must be an object");
    DiffTerm t;
    if (j.contains("coeff")) t.coefficient = GridFunction::from_json(j.at("coeff"));
    if (j.contains("factors")) {
        require(j.at("factors").is_array(), ErrorCode::InvalidArgument, "factors must be an array");
        for (const auto& f : j.at("factors")) t.factors.push_back(factor_from_json(f));
    }
    t.power = j.value("power", 1);
    require(t.power >= 1, ErrorCode::InvalidArgument, "term power must be >= 1");
    return t;
}

json to_json(const ProblemSpec& p)
{
    json bcs = json::array();
    for (const auto& bc : p.boundary) {
        json b = {{"edge", edge_name(bc.edge)}, {"target", bc.target.to_json()}};
        if (bc.is_dirichlet())
            b["kind"] = "dirichlet";
        else {
            b["kind"] = "operator";
            b["terms"] = terms_to_json(bc.terms);
        }
        bcs.push_back(b);
    }
    json j = {{"grid", grid_to_json(p.grid)},
              {"operator", {{"terms", terms_to_json(p.op.terms)}, {"rhs", p.op.rhs.to_json()}}},
              {"boundary", bcs},
              {"lambda", p.lambda}};
    if (!p.name.empty()) j["name"] = p.name;
    switch (p.reference.kind) {
    case ReferenceSpec::Kind::None: break;
    case ReferenceSpec::Kind::WaveExact: j["reference"] = "wave_exact"; break;
    case ReferenceSpec::Kind::HeatOracle: j["reference"] = "heat_oracle"; break;
    case ReferenceSpec::Kind::Function: j["reference"] = p.reference.function.to_json(); break;
    }
    return j;
}

ProblemSpec problem_from_json(const json& j)
{
    require(j.is_object(), ErrorCode::InvalidArgument, "problem must be a JSON object");
    require(j.contains("grid") && j.contains("operator"), ErrorCode::InvalidArgument, "problem needs 'grid' and 'operator'");
    ProblemSpec p{.name = j.value("name", std::string{}), .grid = grid_from_json(j.at("grid"))};
    const auto& op = j.at("operator");
    require(op.contains("terms"), ErrorCode::InvalidArgument, "operator needs 'terms'");
    p.op.terms = terms_from_json(op.at("terms"));
    p.op.rhs = op.contains("rhs") ? GridFunction::from_json(op.at("rhs")) : GridFunction::constant(0.0);
    if (j.contains("boundary")) {
        require(j.at("boundary").is_array(), ErrorCode::InvalidArgument, "boundary must be an array");
        for (const auto& b : j.at("boundary")) {
            BoundaryCondition bc;
            require(b.contains("edge"), ErrorCode::InvalidArgument, "boundary condition needs 'edge'");
            bc.edge = parse_edge(b.at("edge"));
            bc.target = b.contains("target") ? GridFunction::from_json(b.at("target")) : GridFunction::constant(0.0);
            const auto kind = b.value("kind", std::string("dirichlet"));
            if (kind == "neumann") {
                const bool x_edge = bc.edge == Edge::XMin || bc.edge == Edge::XMax;
                bc.terms = {DiffTerm{GridFunction::constant(1.0), {x_edge ? Factor{1, 0} : Factor{0, 1}}, 1}};
            }
            else if (kind == "operator") {
                require(b.contains("terms"), ErrorCode::InvalidArgument, "operator boundary condition needs 'terms'");
                bc.terms = terms_from_json(b.at("terms"));
            }
            else
                require(kind == "dirichlet", ErrorCode::InvalidArgument,
                        "boundary kind must be dirichlet, neumann or operator, got '" + kind + "'");
            p.boundary.push_back(std::move(bc));
        }
    }
    if (j.contains("lambda")) {
        require(j.at("lambda").is_number(), ErrorCode::InvalidArgument, "lambda must be a number");
        p.lambda = j.at("lambda").get<double>();
    }
    if (j.contains("reference")) {
        const auto& r = j.at("reference");
        if (r.is_string() && r.get<std::string>() == "wave_exact")
            p.reference.kind = ReferenceSpec::Kind::WaveExact;
        else if (r.is_string() && r.get<std::string>() == "heat_oracle")
            p.reference.kind = ReferenceSpec::Kind::HeatOracle;
        else if (!r.is_null()) {
            p.reference.kind = ReferenceSpec::Kind::Function;
            p.reference.function = GridFunction::from_json(r);
        }
    }
    p.validate();
    return p;
}

} // namespace pdeopt
