#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "gsle/field.hpp"
#include "gsle/potential_spec.hpp"
#include "gsle/spline.hpp"

namespace gsle {

/// System side f(x) of the bath coupling sum_i d_i f(x) x_i, with f' and f''.
///   linear:      f = x
///   constant:    f = c
///   power:       f = x^n
///   sinusoidal:  f = a sin(k x)
///   tabulated:   splines of f, f', f'' on a uniform table
class CouplingFunction {
public:
    enum class Kind { linear, constant, power, sinusoidal, tabulated };

    static CouplingFunction linear();
    static CouplingFunction constant(double c);
    static CouplingFunction power(int n);
    static CouplingFunction sinusoidal(double amplitude, double wavenumber);
    /// f' and f'' taken from the spline of f.
    static CouplingFunction tabulated(double x0, double h, std::vector<double> f);
    /// Independent tables for f, f' and f''.
    static CouplingFunction tabulated(double x0, double h, std::vector<double> f, std::vector<double> fp,
                                      std::vector<double> fpp);

    Kind kind() const { return kind_; }
    bool is_linear() const { return kind_ == Kind::linear; }
    double constant_value() const { return a_; }
    int exponent() const { return n_; }
    double amplitude() const { return a_; }
    double wavenumber() const { return k_; }

    double eval(double x, int order) const;
    RealField sample(const Grid& grid, int order) const;

    /// Tabulated knots of f (empty for analytic kinds).
    std::vector<double> table() const;
    double table_x0() const;
    double table_h() const;

    bool operator==(const CouplingFunction& other) const;

private:
    struct Tables {
        CubicSpline f;
        std::optional<CubicSpline> fp;
        std::optional<CubicSpline> fpp;
    };

    Kind kind_ = Kind::linear;
    double a_ = 0.0;
    double k_ = 0.0;
    int n_ = 1;
    std::shared_ptr<const Tables> tables_;
};

double eval_coupling(const CouplingFunction& f, double x, int order);

/// f(x) = int_0^x sqrt(V'(y)) dy tabulated on `grid`, with f' = sqrt(V') and
/// f'' = V''/(2 sqrt V') (zero where V' vanishes). Throws NonmonotonePotential if V' < 0.
CouplingFunction gup_coupling(const PotentialSpec& potential, const Grid& grid, double mass = 1.0);

} // namespace gsle
