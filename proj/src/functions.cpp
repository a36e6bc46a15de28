#include "pdeopt/functions.hpp"

#include "pdeopt/error.hpp"
#include "pdeopt/reference.hpp"

#include <cmath>

namespace pdeopt {

using nlohmann::json;

Axis parse_axis(const json& j)
{
    require(j.is_string(), ErrorCode::InvalidArgument, "axis must be \"x\" or \"t\"");
    const auto s = j.get<std::string>();
    if (s == "x") return Axis::X;
    if (s == "t") return Axis::T;
    fail(ErrorCode::InvalidArgument, "unknown axis '" + s + "'");
}

std::string axis_name(Axis a) { return a == Axis::X ? "x" : "t"; }

GridFunction GridFunction::constant(double v)
{
    GridFunction f;
    f.params_ = {v};
    return f;
}

GridFunction GridFunction::affine(double a, double bx, double bt)
{
    GridFunction f;
    f.kind_ = Kind::Affine;
    f.params_ = {a, bx, bt};
    return f;
}

GridFunction GridFunction::poly(Axis axis, std::vector<double> coeffs)
{
    require(!coeffs.empty(), ErrorCode::InvalidArgument, "poly needs at least one coefficient");
    GridFunction f;
    f.kind_ = Kind::Poly;
    f.axis_ = axis;
    f.params_ = std::move(coeffs);
    return f;
}

GridFunction GridFunction::sin_scaled(Axis axis, double scale, double amplitude, double phase)
{
    GridFunction f;
    f.kind_ = Kind::Sin;
    f.axis_ = axis;
    f.params_ = {scale, amplitude, phase};
    return f;
}

GridFunction GridFunction::cos_scaled(Axis axis, double scale, double amplitude, double phase)
{
    GridFunction f = sin_scaled(axis, scale, amplitude, phase);
    f.kind_ = Kind::Cos;
    return f;
}

GridFunction GridFunction::exp_scaled(Axis axis, double scale, double amplitude)
{
    GridFunction f;
    f.kind_ = Kind::Exp;
    f.axis_ = axis;
    f.params_ = {scale, amplitude};
    return f;
}

GridFunction GridFunction::product(std::vector<GridFunction> fs)
{
    require(!fs.empty(), ErrorCode::InvalidArgument, "product of no functions");
    GridFunction f;
    f.kind_ = Kind::Product;
    f.params_.clear();
    f.children_ = std::move(fs);
    return f;
}

GridFunction GridFunction::sum(std::vector<GridFunction> fs)
{
    GridFunction f = product(std::move(fs));
    f.kind_ = Kind::Sum;
    return f;
}

GridFunction GridFunction::wave_exact()
{
    GridFunction f;
    f.kind_ = Kind::WaveExact;
    f.params_.clear();
    return f;
}

double GridFunction::operator()(double x, double t) const
{
    const double c = axis_ == Axis::X ? x : t;
    switch (kind_) {
    case Kind::Const: return params_[0];
    case Kind::Affine: return params_[0] + params_[1] * x + params_[2] * t;
    case Kind::Poly: {
        double acc = 0.0;
        for (auto it = params_.rbegin(); it != params_.rend(); ++it) acc = acc * c + *it;
        return acc;
    }
    case Kind::Sin: return params_[1] * std::sin(params_[0] * c + params_[2]);
    case Kind::Cos: return params_[1] * std::cos(params_[0] * c + params_[2]);
    case Kind::Exp: return params_[1] * std::exp(params_[0] * c);
    case Kind::Product: {
        double acc = 1.0;
        for (const auto& ch : children_) acc *= ch(x, t);
        return acc;
    }
    case Kind::Sum: {
        double acc = 0.0;
        for (const auto& ch : children_) acc += ch(x, t);
        return acc;
    }
    case Kind::WaveExact: return wave_exact_value(x, t);
    }
    return 0.0;
}

Field GridFunction::sample(const GridSpec& grid) const
{
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.n_x(); ++i)
        for (std::size_t j = 0; j < grid.n_t(); ++j) v[grid.index(i, j)] = (*this)(grid.x(i), grid.t(j));
    return {grid, std::move(v)};
}

json GridFunction::to_json() const
{
    switch (kind_) {
    case Kind::Const: return params_[0];
    case Kind::Affine: return {{"fn", "affine"}, {"a", params_[0]}, {"bx", params_[1]}, {"bt", params_[2]}};
    case Kind::Poly: return {{"fn", "poly"}, {"axis", axis_name(axis_)}, {"coeffs", params_}};
    case Kind::Sin:
    case Kind::Cos:
        return {{"fn", kind_ == Kind::Sin ? "sin_scaled" : "cos_scaled"},
                {"axis", axis_name(axis_)},
                {"scale", params_[0]},
                {"amplitude", params_[1]},
                {"phase", params_[2]}};
    case Kind::Exp:
        return {{"fn", "exp_scaled"}, {"axis", axis_name(axis_)}, {"scale", params_[0]}, {"amplitude", params_[1]}};
    case Kind::Product:
    case Kind::Sum: {
        json arr = json::array();
        for (const auto& c : children_) arr.push_back(c.to_json());
        return {{"fn", kind_ == Kind::Product ? "product" : "sum"}, {"of", arr}};
    }
    case Kind::WaveExact: return {{"fn", "wave_exact"}};
    }
    return nullptr;
}

namespace {

double num(const json& j, const char* key, double fallback)
{
    if (!j.contains(key)) return fallback;
    require(j.at(key).is_number(), ErrorCode::InvalidArgument, std::string("function parameter '") + key + "' must be a number");
    return j.at(key).get<double>();
}

double num_required(const json& j, const char* key)
{
    require(j.contains(key), ErrorCode::InvalidArgument, std::string("function is missing '") + key + "'");
    return num(j, key, 0.0);
}

std::vector<GridFunction> children(const json& j)
{
    require(j.contains("of") && j.at("of").is_array(), ErrorCode::InvalidArgument, "composite function needs an 'of' array");
    std::vector<GridFunction> out;
    for (const auto& c : j.at("of")) out.push_back(GridFunction::from_json(c));
    return out;
}

} // namespace

GridFunction GridFunction::from_json(const json& j)
{
    if (j.is_number()) return constant(j.get<double>());
    require(j.is_object() && j.contains("fn") && j.at("fn").is_string(), ErrorCode::InvalidArgument,
            "function must be a number or an object with \"fn\"");
    const auto fn = j.at("fn").get<std::string>();
    if (fn == "const") return constant(num_required(j, "value"));
    if (fn == "affine") return affine(num(j, "a", 0.0), num(j, "bx", 0.0), num(j, "bt", 0.0));
    if (fn == "poly") {
        require(j.contains("coeffs") && j.at("coeffs").is_array(), ErrorCode::InvalidArgument, "poly needs 'coeffs'");
        return poly(parse_axis(j.at("axis")), j.at("coeffs").get<std::vector<double>>());
    }
    if (fn == "sin_scaled")
        return sin_scaled(parse_axis(j.at("axis")), num_required(j, "scale"), num(j, "amplitude", 1.0), num(j, "phase", 0.0));
    if (fn == "cos_scaled")
        return cos_scaled(parse_axis(j.at("axis")), num_required(j, "scale"), num(j, "amplitude", 1.0), num(j, "phase", 0.0));
    if (fn == "exp_scaled") return exp_scaled(parse_axis(j.at("axis")), num_required(j, "scale"), num(j, "amplitude", 1.0));
    if (fn == "product") return product(children(j));
    if (fn == "sum") return sum(children(j));
    if (fn == "wave_exact") return wave_exact();
    fail(ErrorCode::InvalidArgument, "unknown function '" + fn + "'");
}

} // namespace pdeopt
