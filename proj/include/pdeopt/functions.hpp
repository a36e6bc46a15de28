#pragma once

#include "pdeopt/grid.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace pdeopt {

/// Named analytic function of (x, t), used for right-hand sides, boundary
/// targets, variable coefficients and closed-form references.
///
/// JSON forms:
///   3.5                                         constant
///   {"fn":"const","value":v}
///   {"fn":"affine","a":a,"bx":bx,"bt":bt}       a + bx*x + bt*t
///   {"fn":"poly","axis":"x","coeffs":[c0,c1,..]} sum c_k * axis^k
///   {"fn":"sin_scaled","axis":"x","scale":s,"amplitude":A,"phase":p}  A*sin(s*axis + p)
///   {"fn":"cos_scaled", ...}                    A*cos(s*axis + p)
///   {"fn":"exp_scaled","axis":"t","scale":s,"amplitude":A}           A*exp(s*axis)
///   {"fn":"product","of":[f, g, ...]}, {"fn":"sum","of":[...]}
///   {"fn":"wave_exact"}                         closed-form solution of the builtin wave problem
class GridFunction {
  public:
    enum class Kind { Const, Affine, Poly, Sin, Cos, Exp, Product, Sum, WaveExact };

    GridFunction() = default;
    static GridFunction constant(double v);
    static GridFunction affine(double a, double bx, double bt);
    static GridFunction poly(Axis axis, std::vector<double> coeffs);
    static GridFunction sin_scaled(Axis axis, double scale, double amplitude = 1.0, double phase = 0.0);
    static GridFunction cos_scaled(Axis axis, double scale, double amplitude = 1.0, double phase = 0.0);
    static GridFunction exp_scaled(Axis axis, double scale, double amplitude = 1.0);
    static GridFunction product(std::vector<GridFunction> fs);
    static GridFunction sum(std::vector<GridFunction> fs);
    static GridFunction wave_exact();

    [[nodiscard]] double operator()(double x, double t) const;
    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_constant() const noexcept { return kind_ == Kind::Const; }
    [[nodiscard]] double constant_value() const noexcept { return params_.empty() ? 0.0 : params_[0]; }

    /// Samples on every grid node; throws NonFinite if any sample is NaN/Inf.
    [[nodiscard]] Field sample(const GridSpec& grid) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static GridFunction from_json(const nlohmann::json& j);

  private:
    Kind kind_ = Kind::Const;
    Axis axis_ = Axis::X;
    std::vector<double> params_{0.0};
    std::vector<GridFunction> children_;
};

Axis parse_axis(const nlohmann::json& j);
std::string axis_name(Axis a);

} // namespace pdeopt
