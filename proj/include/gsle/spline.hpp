#pragma once

#include <cstddef>
#include <vector>

namespace gsle {

/// Cubic spline through uniformly spaced samples with not-a-knot end conditions.
class CubicSpline {
public:
    CubicSpline(double x0, double h, std::vector<double> y);

    /// Value (order 0) or derivative (order 1, 2). Outside [x_front, x_back] throws
    /// OutOfDomain unless `extrapolate`, which continues the end cubic.
    double eval(double x, int order = 0, bool extrapolate = false) const;

    double x_front() const { return x0_; }
    double x_back() const { return x0_ + h_ * static_cast<double>(y_.size() - 1); }
    const std::vector<double>& knots_y() const { return y_; }

private:
    double x0_;
    double h_;
    std::vector<double> y_;
    std::vector<double> m_; // second derivatives at the knots
};

} // namespace gsle
