#include "gsle/field.hpp"

#include <algorithm>
#include <numbers>

#include "gsle/fft.hpp"

namespace gsle {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidField: return "InvalidField";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::DegenerateState: return "DegenerateState";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NonmonotonePotential: return "NonmonotonePotential";
    case ErrorCode::EmptyBath: return "EmptyBath";
    case ErrorCode::InvalidFriction: return "InvalidFriction";
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::MemoryBudgetExceeded: return "MemoryBudgetExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Grid::Grid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points), dx_((x_max - x_min) / static_cast<double>(n_points))
{
    if (n_points < 8 || (n_points & (n_points - 1)) != 0)
        throw Error(ErrorCode::InvalidGrid, "n_points must be a power of two and at least 8");
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
        throw Error(ErrorCode::InvalidGrid, "x_max must exceed x_min");
}

std::vector<double> Grid::points() const
{
    std::vector<double> xs(n_);
    for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
    return xs;
}

std::vector<double> Grid::wavenumbers() const
{
    std::vector<double> k(n_);
    const double dk = 2.0 * std::numbers::pi / length();
    const auto half = static_cast<std::ptrdiff_t>(n_ / 2);
    for (std::size_t j = 0; j < n_; ++j) {
        auto m = static_cast<std::ptrdiff_t>(j);
        if (m >= half) m -= static_cast<std::ptrdiff_t>(n_);
        k[j] = dk * static_cast<double>(m);
    }
    return k;
}

void PhysicalParams::validate() const
{
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw Error(ErrorCode::InvalidParams, "hbar must be positive");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(ErrorCode::InvalidParams, "mass must be positive");
}

double integrate(const RealField& field)
{
    double sum = 0.0;
    for (double v : field.values()) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidField, "non-finite sample in integrand");
        sum += v;
    }
    return sum * field.grid().dx();
}

namespace {

// w[o][k] = int_o^{o+1} L_k(t) dt for the Lagrange basis on nodes t = 0..s-1.
std::vector<std::vector<double>> interval_weights(std::size_t s)
{
    std::vector<std::vector<double>> w(s - 1, std::vector<double>(s, 0.0));
    for (std::size_t k = 0; k < s; ++k) {
        std::vector<double> c{1.0}; // ascending powers of t
        for (std::size_t m = 0; m < s; ++m) {
            if (m == k) continue;
            const double denom = static_cast<double>(k) - static_cast<double>(m);
            std::vector<double> next(c.size() + 1, 0.0);
            for (std::size_t p = 0; p < c.size(); ++p) {
                next[p + 1] += c[p] / denom;
                next[p] -= c[p] * static_cast<double>(m) / denom;
            }
            c = std::move(next);
        }
        for (std::size_t o = 0; o + 1 < s; ++o) {
            const double a = static_cast<double>(o), b = a + 1.0;
            double pa = 1.0, pb = 1.0, sum = 0.0;
            for (std::size_t p = 0; p < c.size(); ++p) {
                pa *= a;
                pb *= b;
                sum += c[p] * (pb - pa) / static_cast<double>(p + 1);
            }
            w[o][k] = sum;
        }
    }
    return w;
}

} // namespace

std::vector<double> cumulative_integral(std::span<const double> g, double dx, Boundary boundary)
{
    const std::size_t n = g.size();
    if (n < 4) throw Error(ErrorCode::InvalidField, "cumulative integral needs at least four samples");
    std::vector<double> out(n, 0.0);
    const std::size_t s = std::min<std::size_t>(8, n);
    const auto weights = interval_weights(s);
    const auto nn = static_cast<std::ptrdiff_t>(n);
    const auto half = static_cast<std::ptrdiff_t>(s / 2 - 1);
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        auto first = static_cast<std::ptrdiff_t>(j) - half;
        if (boundary == Boundary::open) first = std::clamp<std::ptrdiff_t>(first, 0, nn - static_cast<std::ptrdiff_t>(s));
        const auto& w = weights[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(j) - first)];
        double piece = 0.0;
        for (std::size_t k = 0; k < s; ++k) {
            const std::ptrdiff_t i = first + static_cast<std::ptrdiff_t>(k);
            piece += w[k] * g[static_cast<std::size_t>(((i % nn) + nn) % nn)];
        }
        acc += dx * piece;
        out[j + 1] = acc;
    }
    return out;
}

namespace {

void spectral_derivative_inplace(std::vector<Complex>& data, const Grid& grid, int order)
{
    if (order != 1 && order != 2) throw Error(ErrorCode::UnsupportedOrder, "derivative order must be 1 or 2");
    const Fft fft(grid.size());
    const auto k = grid.wavenumbers();
    fft.forward(data);
    const std::size_t nyquist = grid.size() / 2;
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (order == 1)
            data[j] = (j == nyquist) ? Complex{} : Complex(0.0, k[j]) * data[j];
        else
            data[j] *= -k[j] * k[j];
    }
    fft.inverse(data);
}

} // namespace

ComplexField differentiate(const ComplexField& field, int order)
{
    std::vector<Complex> data(field.values().begin(), field.values().end());
    spectral_derivative_inplace(data, field.grid(), order);
    return ComplexField(field.grid(), std::move(data));
}

RealField differentiate(const RealField& field, int order)
{
    std::vector<Complex> data(field.values().begin(), field.values().end());
    spectral_derivative_inplace(data, field.grid(), order);
    std::vector<double> re(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) re[j] = data[j].real();
    return RealField(field.grid(), std::move(re));
}

RealField density(const WaveFunction& psi)
{
    std::vector<double> rho(psi.size());
    for (std::size_t j = 0; j < rho.size(); ++j) rho[j] = std::norm(psi[j]);
    return RealField(psi.grid(), std::move(rho));
}

double norm(const WaveFunction& psi) { return integrate(density(psi)); }

WaveFunction normalized(const WaveFunction& psi)
{
    const double nrm = norm(psi);
    if (!(nrm > 0.0)) throw Error(ErrorCode::DegenerateState, "wavefunction has zero norm");
    const double s = 1.0 / std::sqrt(nrm);
    std::vector<Complex> v(psi.values().begin(), psi.values().end());
    for (auto& c : v) c *= s;
    return WaveFunction(psi.grid(), std::move(v));
}

double density_floor(std::span<const double> rho)
{
    double mx = 0.0;
    for (double r : rho) mx = std::max(mx, r);
    return kDensityFloorRel * mx;
}

double expectation(const WaveFunction& psi, const RealField& observable)
{
    if (observable.size() != psi.size()) throw Error(ErrorCode::InvalidField, "observable/grid size mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double r = std::norm(psi[j]);
        num += observable[j] * r;
        den += r;
    }
    if (!std::isfinite(num) || !std::isfinite(den)) throw Error(ErrorCode::InvalidField, "non-finite expectation");
    if (!(den > 0.0)) throw Error(ErrorCode::DegenerateState, "wavefunction has zero norm");
    return num / den;
}

ObservableSet observables(const WaveFunction& psi, const RealField& potential, const PhysicalParams& params)
{
    if (!psi.all_finite()) throw Error(ErrorCode::InvalidField, "non-finite wavefunction");
    const Grid& g = psi.grid();
    const auto d1 = differentiate(psi, 1);
    const auto d2 = differentiate(psi, 2);

    double sum_r = 0.0, sum_xr = 0.0, sum_p = 0.0, sum_kin = 0.0, sum_v = 0.0, rho_max = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double r = std::norm(psi[j]);
        sum_r += r;
        sum_xr += g.x(j) * r;
        sum_p += (std::conj(psi[j]) * d1[j]).imag();
        sum_kin -= (std::conj(psi[j]) * d2[j]).real();
        sum_v += potential[j] * r;
        rho_max = std::max(rho_max, r);
    }
    if (!(sum_r > 0.0)) throw Error(ErrorCode::DegenerateState, "wavefunction has zero norm");

    ObservableSet o;
    o.norm = sum_r * g.dx();
    o.mean_x = sum_xr / sum_r;
    double sum_var = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double d = g.x(j) - o.mean_x;
        sum_var += d * d * std::norm(psi[j]);
    }
    o.var_x = sum_var / sum_r;
    o.mean_p = params.hbar * sum_p / sum_r;
    o.energy = (params.hbar * params.hbar / (2.0 * params.mass) * sum_kin + sum_v) / sum_r;

    const std::size_t edge = std::max<std::size_t>(1, (psi.size() + 50) / 100);
    double edge_max = 0.0;
    for (std::size_t j = 0; j < edge; ++j) {
        edge_max = std::max(edge_max, std::norm(psi[j]));
        edge_max = std::max(edge_max, std::norm(psi[psi.size() - 1 - j]));
    }
    o.boundary_density = edge_max / rho_max;
    return o;
}

} // namespace gsle
