#include "gsle/spline.hpp"

#include <algorithm>
#include <cmath>

#include "gsle/error.hpp"

namespace gsle {

CubicSpline::CubicSpline(double x0, double h, std::vector<double> y) : x0_(x0), h_(h), y_(std::move(y))
{
    const std::size_t n = y_.size();
    if (n < 4) throw Error(ErrorCode::InvalidField, "spline needs at least four knots");
    if (!(h_ > 0.0)) throw Error(ErrorCode::InvalidField, "spline spacing must be positive");

    // Interior rows M[i-1] + 4M[i] + M[i+1] = r[i]; eliminating M[0] = 2M[1] - M[2] and
    // M[n-1] = 2M[n-2] - M[n-3] leaves a tridiagonal system in M[1..n-2].
    const std::size_t k = n - 2;
    std::vector<double> lower(k, 1.0), diag(k, 4.0), upper(k, 1.0), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) rhs[i - 1] = 6.0 * (y_[i - 1] - 2.0 * y_[i] + y_[i + 1]) / (h_ * h_);
    diag[0] = 6.0;
    upper[0] = 0.0;
    diag[k - 1] = 6.0;
    lower[k - 1] = 0.0;

    for (std::size_t i = 1; i < k; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> sol(k);
    sol[k - 1] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];

    m_.assign(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) m_[i + 1] = sol[i];
    m_[0] = 2.0 * m_[1] - m_[2];
    m_[n - 1] = 2.0 * m_[n - 2] - m_[n - 3];
}

double CubicSpline::eval(double x, int order, bool extrapolate) const
{
    if (order < 0 || order > 2) throw Error(ErrorCode::UnsupportedOrder, "spline order must be 0, 1 or 2");
    const double span = x_back() - x0_;
    const double slack = 1e-12 * std::max(1.0, span);
    if (!extrapolate && (x < x0_ - slack || x > x_back() + slack))
        throw Error(ErrorCode::OutOfDomain, "x outside tabulated range");

    const auto last = static_cast<std::ptrdiff_t>(y_.size()) - 2;
    auto i = static_cast<std::ptrdiff_t>(std::floor((x - x0_) / h_));
    i = std::clamp<std::ptrdiff_t>(i, 0, last);
    const auto u = static_cast<std::size_t>(i);
    const double xl = x0_ + h_ * static_cast<double>(i);
    const double a = xl + h_ - x; // distance to right knot
    const double b = x - xl;      // distance to left knot
    const double ml = m_[u], mr = m_[u + 1];
    const double cl = y_[u] / h_ - ml * h_ / 6.0;
    const double cr = y_[u + 1] / h_ - mr * h_ / 6.0;
    switch (order) {
    case 0: return ml * a * a * a / (6.0 * h_) + mr * b * b * b / (6.0 * h_) + cl * a + cr * b;
    case 1: return -ml * a * a / (2.0 * h_) + mr * b * b / (2.0 * h_) - cl + cr;
    default: return (ml * a + mr * b) / h_;
    }
}

} // namespace gsle
