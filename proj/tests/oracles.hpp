#pragma once

// Reference computations used by the tests. None of them call into the library's numerics.

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// Spectral derivative by direct O(n^2) DFT on a periodic interval of length L.
inline std::vector<cplx> dft_derivative(const std::vector<cplx>& f, double length, int order)
{
    const std::size_t n = f.size();
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<cplx> coef(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += f[j] * std::polar(1.0, -two_pi * double(k * j % n) / double(n));
        coef[k] = s / double(n);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double kk = two_pi / length * (k < n / 2 ? double(k) : double(k) - double(n));
        if (order == 1) coef[k] *= (k == n / 2) ? cplx(0.0) : cplx(0.0, kk);
        else coef[k] *= -kk * kk;
    }
    std::vector<cplx> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += coef[k] * std::polar(1.0, two_pi * double(k * j % n) / double(n));
        out[j] = s;
    }
    return out;
}

/// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels)
{
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Underdamped oscillator x'' + gamma x' + w^2 x = 0.
inline double damped_oscillator(double x0, double v0, double omega, double gamma, double t)
{
    const double wd = std::sqrt(omega * omega - 0.25 * gamma * gamma);
    return std::exp(-0.5 * gamma * t) * (x0 * std::cos(wd * t) + (v0 + 0.5 * gamma * x0) / wd * std::sin(wd * t));
}

/// Position variance of a free Gaussian packet with initial standard deviation sigma.
inline double free_packet_variance(double sigma, double t, double hbar = 1.0, double mass = 1.0)
{
    const double s = hbar * t / (2.0 * mass * sigma);
    return sigma * sigma + s * s;
}

/// Classical RK4 for y' = F(t, y) on a fixed grid of n steps.
template <typename F>
std::vector<double> rk4(F&& rhs, std::vector<double> y, double t0, double dt, std::size_t n)
{
    const std::size_t d = y.size();
    auto axpy = [&](const std::vector<double>& a, const std::vector<double>& b, double s) {
        std::vector<double> r(d);
        for (std::size_t i = 0; i < d; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    double t = t0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto k1 = rhs(t, y);
        const auto k2 = rhs(t + 0.5 * dt, axpy(y, k1, 0.5 * dt));
        const auto k3 = rhs(t + 0.5 * dt, axpy(y, k2, 0.5 * dt));
        const auto k4 = rhs(t + dt, axpy(y, k3, dt));
        for (std::size_t i = 0; i < d; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += dt;
    }
    return y;
}

/// Reads a CSV file written by the runner: skips '#' lines, returns the header and numeric rows
/// (empty cells become NaN).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const
    {
        std::size_t c = 0;
        while (c < columns.size() && columns[c] != name) ++c;
        std::vector<double> out;
        if (c == columns.size()) return out;
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

inline Table read_csv(const std::filesystem::path& path)
{
    Table t;
    std::ifstream in(path);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (header) {
            t.columns = cells;
            header = false;
            continue;
        }
        std::vector<double> r;
        for (const auto& c : cells) r.push_back(c.empty() ? std::nan("") : std::stod(c));
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace oracle
