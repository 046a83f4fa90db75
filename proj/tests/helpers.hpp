#pragma once

#include <cmath>
#include <complex>
#include <optional>

#include "gsle/error.hpp"
#include "gsle/field.hpp"

namespace testing {

/// Error code thrown by `fn`, or nothing if it returns normally.
template <typename F>
std::optional<gsle::ErrorCode> thrown_code(F&& fn)
{
    try {
        fn();
    } catch (const gsle::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline gsle::WaveFunction gaussian(const gsle::Grid& grid, double x0, double p0, double sigma, double hbar = 1.0)
{
    return gsle::normalized(gsle::WaveFunction::sample(grid, [&](double x) {
        const double d = x - x0;
        return std::exp(gsle::Complex(-d * d / (4.0 * sigma * sigma), p0 * x / hbar));
    }));
}

template <typename T>
double max_abs_diff(const T& a, const T& b)
{
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

} // namespace testing
