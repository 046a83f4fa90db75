#include "gsle/bohmian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace gsle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct MaskRun {
    std::size_t begin; // first masked index
    std::size_t end;   // one past the last masked index
};

std::vector<MaskRun> masked_runs(const std::vector<std::uint8_t>& mask)
{
    std::vector<MaskRun> runs;
    std::size_t j = 0;
    while (j < mask.size()) {
        if (!mask[j]) {
            ++j;
            continue;
        }
        const std::size_t b = j;
        while (j < mask.size() && mask[j]) ++j;
        runs.push_back({b, j});
    }
    return runs;
}

// hbar Im(psi'/psi): the phase gradient at an unmasked cell.
double phase_gradient(const Complex& psi, const Complex& dpsi, double hbar)
{
    return hbar * (std::conj(psi) * dpsi).imag() / std::norm(psi);
}

} // namespace

WaveFunction PolarField::reconstruct() const
{
    std::vector<Complex> v(amplitude.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::polar(amplitude[j], phase[j] / hbar);
    return WaveFunction(amplitude.grid(), std::move(v));
}

PolarField polar_decompose(const WaveFunction& psi, const PhysicalParams& params)
{
    const Grid& g = psi.grid();
    const std::size_t n = g.size();
    const double hbar = params.hbar;

    std::vector<double> a(n), rho(n), arg(n);
    std::size_t anchor = 0;
    for (std::size_t j = 0; j < n; ++j) {
        rho[j] = std::norm(psi[j]);
        a[j] = std::abs(psi[j]);
        arg[j] = hbar * std::arg(psi[j]);
        if (rho[j] > rho[anchor]) anchor = j;
    }
    if (!(rho[anchor] > 0.0)) throw Error(ErrorCode::DegenerateState, "cannot decompose a vanishing wavefunction");
    const double eps = kDensityFloorRel * rho[anchor];
    std::vector<std::uint8_t> mask(n);
    for (std::size_t j = 0; j < n; ++j) mask[j] = rho[j] < eps ? 1 : 0;

    const double period = kTwoPi * hbar;
    std::vector<double> s(n, 0.0);
    s[anchor] = arg[anchor];
    auto unwrap_from = [&](std::size_t last, std::size_t j) {
        s[j] = arg[j] + period * std::round((s[last] - arg[j]) / period);
    };
    for (std::size_t j = anchor + 1, last = anchor; j < n; ++j)
        if (!mask[j]) unwrap_from(last, j), last = j;
    for (std::size_t j = anchor, last = anchor; j-- > 0;)
        if (!mask[j]) unwrap_from(last, j), last = j;

    // End runs continue the phase with the slope between the two outermost unmasked cells.
    auto edge_slope = [&](std::size_t e, std::size_t inner) {
        return (inner < n && !mask[inner]) ? (s[e] - s[inner]) : 0.0;
    };
    for (const auto& r : masked_runs(mask)) {
        if (r.begin > 0 && r.end < n) {
            const double sl = s[r.begin - 1], sr = s[r.end];
            const double span = static_cast<double>(r.end - r.begin + 1);
            for (std::size_t j = r.begin; j < r.end; ++j)
                s[j] = sl + (sr - sl) * static_cast<double>(j - r.begin + 1) / span;
        } else if (r.begin == 0 && r.end < n) {
            const std::size_t e = r.end;
            const double step = edge_slope(e, e + 1);
            for (std::size_t j = 0; j < e; ++j) s[j] = s[e] + step * static_cast<double>(e - j);
        } else if (r.begin > 0) {
            const std::size_t e = r.begin - 1;
            const double step = edge_slope(e, e - 1);
            for (std::size_t j = r.begin; j < n; ++j) s[j] = s[e] + step * static_cast<double>(j - e);
        }
    }
    return PolarField{psi, RealField(g, std::move(a)), RealField(g, std::move(s)), std::move(mask), hbar};
}

RealField guiding_momentum(const PolarField& polar, const PhysicalParams& params)
{
    const Grid& g = polar.psi.grid();
    const std::size_t n = g.size();
    const auto d = differentiate(polar.psi, 1);
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j)
        if (!polar.node_mask[j]) p[j] = phase_gradient(polar.psi[j], d[j], params.hbar);

    // Inside masked runs the phase is piecewise linear; use its slope.
    for (const auto& r : masked_runs(polar.node_mask)) {
        if (r.begin > 0 && r.end < n) {
            const double slope = (polar.phase[r.end] - polar.phase[r.begin - 1]) /
                                 (g.dx() * static_cast<double>(r.end - r.begin + 1));
            for (std::size_t j = r.begin; j < r.end; ++j) p[j] = slope;
        } else if (r.begin == 0 && r.end < n) {
            const double slope = (polar.phase[r.end] - polar.phase[r.end - 1]) / g.dx();
            for (std::size_t j = 0; j < r.end; ++j) p[j] = slope;
        } else if (r.begin > 0) {
            const double slope = (polar.phase[r.begin] - polar.phase[r.begin - 1]) / g.dx();
            for (std::size_t j = r.begin; j < n; ++j) p[j] = slope;
        }
    }
    return RealField(g, std::move(p));
}

TildePhaseForms tilde_phase_forms(const PolarField& polar, const CouplingFunction& f, const PhysicalParams& params)
{
    const Grid& g = polar.psi.grid();
    const std::size_t n = g.size();
    const auto p = guiding_momentum(polar, params);
    const auto fp = f.sample(g, 1);
    const auto fpp = f.sample(g, 2);

    std::vector<double> gi(n), gp(n);
    for (std::size_t j = 0; j < n; ++j) {
        gi[j] = fp[j] * fp[j] * p[j];
        gp[j] = polar.phase[j] * fp[j] * fpp[j];
    }
    auto integral = cumulative_integral(gi, g.dx(), Boundary::open);
    const auto partial = cumulative_integral(gp, g.dx(), Boundary::open);
    std::vector<double> product(n);
    for (std::size_t j = 0; j < n; ++j) product[j] = fp[j] * fp[j] * polar.phase[j] - 2.0 * partial[j];
    return {RealField(g, std::move(integral)), RealField(g, std::move(product))};
}

RealField tilde_phase(const PolarField& polar, const CouplingFunction& f, const PhysicalParams& params)
{
    return tilde_phase_forms(polar, f, params).integral_form;
}

WeakValueField weak_value(const PolarField& polar, const PhysicalParams& params)
{
    const Grid& g = polar.psi.grid();
    const auto d = differentiate(polar.psi, 1);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> re(g.size(), nan), im(g.size(), nan);
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (polar.node_mask[j]) continue;
        const Complex c = std::conj(polar.psi[j]) * d[j];
        const double rho = std::norm(polar.psi[j]);
        re[j] = params.hbar * c.imag() / rho;
        // -(hbar/2A^2) d(A^2)/dx with d(A^2)/dx = 2 Re(psi* psi')
        im[j] = -params.hbar * c.real() / rho;
    }
    return {RealField(g, std::move(re)), RealField(g, std::move(im)), polar.node_mask};
}

DensityCdf::DensityCdf(const WaveFunction& psi) : grid_(psi.grid()), rho_(psi.size()), cum_(psi.size() + 1)
{
    for (std::size_t j = 0; j < rho_.size(); ++j) rho_[j] = std::norm(psi[j]);
    const std::size_t n = rho_.size();
    const double dx = grid_.dx();
    cum_[0] = 0.0;
    for (std::size_t j = 0; j < n; ++j) cum_[j + 1] = cum_[j] + 0.5 * dx * (rho_[j] + rho_[(j + 1) % n]);
    total_ = cum_[n];
    if (!(total_ > 0.0)) throw Error(ErrorCode::DegenerateState, "density integrates to zero");
}

double DensityCdf::cdf(double x) const
{
    const std::size_t n = rho_.size();
    const double dx = grid_.dx();
    double u = (x - grid_.x_min()) / dx;
    if (u <= 0.0) return 0.0;
    if (u >= static_cast<double>(n)) return 1.0;
    const auto j = static_cast<std::size_t>(u);
    const double t = u - static_cast<double>(j);
    const double r0 = rho_[j], r1 = rho_[(j + 1) % n];
    return (cum_[j] + dx * (r0 * t + 0.5 * (r1 - r0) * t * t)) / total_;
}

double DensityCdf::inverse(double u) const
{
    const std::size_t n = rho_.size();
    const double dx = grid_.dx();
    const double target = std::clamp(u, 0.0, 1.0) * total_;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - cum_.begin()) - 1));
    j = std::min(j, n - 1);
    const double r0 = rho_[j], r1 = rho_[(j + 1) % n];
    const double m = (target - cum_[j]) / dx; // r0 t + (r1-r0) t^2 / 2 = m
    double t;
    const double a = 0.5 * (r1 - r0);
    if (std::abs(a) < 1e-14 * std::max(r0, r1)) {
        t = r0 > 0.0 ? m / r0 : 0.5;
    } else {
        const double disc = std::max(0.0, r0 * r0 + 4.0 * a * m);
        t = 2.0 * m / (r0 + std::sqrt(disc));
    }
    return grid_.x(j) + dx * std::clamp(t, 0.0, 1.0);
}

double VelocityHistory::at(double x, double t) const
{
    const std::size_t n = grid.size();
    const double dx = grid.dx();
    auto in_space = [&](const std::vector<double>& v) {
        const double u = (x - grid.x_min()) / dx;
        const double fl = std::floor(u);
        const double s = u - fl;
        const auto nn = static_cast<std::ptrdiff_t>(n);
        const auto i = static_cast<std::ptrdiff_t>(fl);
        auto val = [&](std::ptrdiff_t k) { return v[static_cast<std::size_t>(((k % nn) + nn) % nn)]; };
        const double vm = val(i - 1), v0 = val(i), v1 = val(i + 1), v2 = val(i + 2);
        // Lagrange cubic through nodes -1, 0, 1, 2
        return vm * (-s * (s - 1.0) * (s - 2.0) / 6.0) + v0 * ((s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0) +
               v1 * (-(s + 1.0) * s * (s - 2.0) / 2.0) + v2 * ((s + 1.0) * s * (s - 1.0) / 6.0);
    };
    if (times.size() == 1 || t <= times.front()) return in_space(velocity.front());
    if (t >= times.back()) return in_space(velocity.back());
    const double h = times[1] - times[0];
    auto k = static_cast<std::size_t>((t - times.front()) / h);
    k = std::min(k, times.size() - 2);
    const double w = (t - times[k]) / h;
    return (1.0 - w) * in_space(velocity[k]) + w * in_space(velocity[k + 1]);
}

VelocityHistory velocity_history(std::span<const Snapshot> history, const PhysicalParams& params)
{
    if (history.empty()) throw Error(ErrorCode::InsufficientData, "trajectory propagation needs snapshots");
    VelocityHistory vh{history.front().psi.grid(), {}, {}};
    for (const auto& s : history) {
        vh.times.push_back(s.t);
        auto p = guiding_momentum(polar_decompose(s.psi, params), params);
        auto v = std::move(p).release();
        for (double& x : v) x /= params.mass;
        vh.velocity.push_back(std::move(v));
    }
    return vh;
}

TrajectoryEnsemble propagate_trajectories(const VelocityHistory& velocity, const WaveFunction& initial,
                                          std::size_t n_traj, std::uint64_t seed, int substeps)
{
    if (velocity.times.empty()) throw Error(ErrorCode::InsufficientData, "trajectory propagation needs snapshots");
    if (n_traj == 0) throw Error(ErrorCode::InvalidParams, "n_traj must be at least 1");
    if (substeps < 1) throw Error(ErrorCode::InvalidParams, "substeps must be at least 1");

    const Grid& g = velocity.grid;
    const DensityCdf cdf(initial);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    TrajectoryEnsemble out;
    out.times = velocity.times;
    out.positions.assign(n_traj, std::vector<double>(velocity.times.size()));
    auto wrap = [&](double x) {
        const double l = g.length();
        double y = std::fmod(x - g.x_min(), l);
        if (y < 0.0) y += l;
        return g.x_min() + y;
    };

    for (std::size_t k = 0; k < n_traj; ++k) {
        double x = cdf.inverse(uni(rng));
        out.positions[k][0] = x;
        for (std::size_t i = 0; i + 1 < velocity.times.size(); ++i) {
            const double h = (velocity.times[i + 1] - velocity.times[i]) / substeps;
            double t = velocity.times[i];
            for (int s = 0; s < substeps; ++s) {
                const double k1 = velocity.at(x, t);
                const double k2 = velocity.at(x + 0.5 * h * k1, t + 0.5 * h);
                const double k3 = velocity.at(x + 0.5 * h * k2, t + 0.5 * h);
                const double k4 = velocity.at(x + h * k3, t + h);
                x += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
                t += h;
            }
            x = wrap(x);
            out.positions[k][i + 1] = x;
        }
    }
    return out;
}

TrajectoryEnsemble propagate_trajectories(std::span<const Snapshot> history, std::size_t n_traj, std::uint64_t seed,
                                          const PhysicalParams& params, int substeps)
{
    const auto vh = velocity_history(history, params);
    return propagate_trajectories(vh, history.front().psi, n_traj, seed, substeps);
}

double equivariance_distance(const TrajectoryEnsemble& ensemble, const WaveFunction& psi_t, std::size_t t_index)
{
    if (ensemble.positions.empty() || t_index >= ensemble.times.size())
        throw Error(ErrorCode::InsufficientData, "time index outside trajectory record");
    std::vector<double> xs;
    xs.reserve(ensemble.positions.size());
    for (const auto& traj : ensemble.positions) xs.push_back(traj[t_index]);
    std::sort(xs.begin(), xs.end());
    const DensityCdf cdf(psi_t);
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf.cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

} // namespace gsle
