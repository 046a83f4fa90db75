#include "gsle/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace gsle {

void SimConfig::validate() const
{
    params.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidParams, "dt must be positive");
    if (n_steps < 1) throw Error(ErrorCode::InvalidParams, "n_steps must be at least 1");
    if (!(friction >= 0.0)) throw Error(ErrorCode::InvalidFriction, "friction must be non-negative");
    if (!(kappa >= 0.0)) throw Error(ErrorCode::InvalidResolution, "kappa must be non-negative");
    if (!(noise.temperature >= 0.0)) throw Error(ErrorCode::InvalidParams, "temperature must be non-negative");
    if (noise.kind == NoiseKind::bath) {
        if (noise.bath) noise.bath->validate();
        else if (noise.ohmic.n_oscillators == 0) throw Error(ErrorCode::EmptyBath, "bath has no oscillators");
    }
}

WaveFunction initial_wavefunction(const SimConfig& config)
{
    const Grid& g = config.grid;
    const double hbar = config.params.hbar;
    std::vector<Complex> v(g.size());

    if (const auto* gs = std::get_if<GaussianState>(&config.initial)) {
        if (!(gs->sigma > 0.0)) throw Error(ErrorCode::InvalidParams, "Gaussian width must be positive");
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double d = g.x(j) - gs->x0;
            v[j] = std::exp(Complex(-d * d / (4.0 * gs->sigma * gs->sigma), gs->p0 * g.x(j) / hbar));
        }
    } else if (const auto* es = std::get_if<EigenstateState>(&config.initial)) {
        if (config.potential.kind != PotentialSpec::Kind::harmonic)
            throw Error(ErrorCode::InvalidParams, "eigenstate initial state requires a harmonic potential");
        if (es->index < 0) throw Error(ErrorCode::InvalidParams, "eigenstate index must be non-negative");
        const double s = std::sqrt(config.params.mass * config.potential.omega / hbar);
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double q = s * g.x(j);
            // normalized Hermite functions by upward recurrence
            double prev = 0.0;
            double cur = std::exp(-0.5 * q * q) / std::pow(std::numbers::pi, 0.25);
            for (int n = 0; n < es->index; ++n) {
                const double next = std::sqrt(2.0 / (n + 1)) * q * cur - std::sqrt(double(n) / (n + 1)) * prev;
                prev = cur;
                cur = next;
            }
            v[j] = std::sqrt(s) * cur;
        }
    } else {
        const auto& ex = std::get<ExplicitState>(config.initial);
        if (ex.values.size() != g.size())
            throw Error(ErrorCode::InvalidField, "initial state length does not match grid size");
        v = ex.values;
    }
    return normalized(WaveFunction(g, std::move(v)));
}

NoiseRealization run_noise(const SimConfig& config)
{
    const std::size_t n = config.n_steps + 1;
    const auto& nc = config.noise;
    switch (nc.kind) {
    case NoiseKind::zero:
        return zero_noise(config.dt, n);
    case NoiseKind::white:
        return white_noise(config.friction, nc.temperature, config.params.mass, config.dt, n, config.seed);
    case NoiseKind::bath: {
        BathSpec bath;
        if (nc.bath) {
            bath = *nc.bath;
        } else {
            OhmicSpec o = nc.ohmic;
            o.friction = config.friction;
            o.temperature = nc.temperature;
            bath = discretize_ohmic(o, config.params.mass);
        }
        const auto times = uniform_times(0.5 * config.dt, config.dt, n);
        return sample_bath_noise(bath, nc.temperature, times, config.seed);
    }
    }
    throw Error(ErrorCode::InvalidParams, "unknown noise kind");
}

Propagator::Propagator(const SimConfig& config) : config_(config), fft_(config.grid.size())
{
    const Grid& g = config.grid;
    k_ = g.wavenumbers();
    kinetic_half_.resize(k_.size());
    const double c = config.params.hbar * config.dt / (4.0 * config.params.mass);
    for (std::size_t i = 0; i < k_.size(); ++i) kinetic_half_[i] = std::polar(1.0, -c * k_[i] * k_[i]);
    k_[k_.size() / 2] = 0.0; // first derivative drops the Nyquist mode

    v_ = std::move(config.potential.sample(g, 0, config.params.mass)).release();
    f_ = std::move(config.coupling.sample(g, 0)).release();
    if (!config.coupling.is_linear()) {
        fp2_ = std::move(config.coupling.sample(g, 1)).release();
        for (double& x : fp2_) x *= x;
    }
}

void Propagator::apply_kinetic_half(std::vector<Complex>& psi) const
{
    fft_.forward(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= kinetic_half_[i];
    fft_.inverse(psi);
}

void Propagator::compute_terms(std::span<const Complex> psi, double xi, Terms& out) const
{
    const std::size_t n = psi.size();
    const double hbar = config_.params.hbar;
    out.u.resize(n);
    std::vector<double> vd(n, 0.0);
    out.w = 0.0;
    if (config_.friction > 0.0) {
        std::vector<Complex> d(psi.begin(), psi.end());
        fft_.forward(d);
        for (std::size_t i = 0; i < n; ++i) d[i] *= Complex(0.0, k_[i]);
        fft_.inverse(d);
        out.w = detail::dissipative_into(psi, d, fp2_, sign_factor(config_.sign) * config_.friction, hbar,
                                         config_.grid.dx(), vd);
    }
    for (std::size_t i = 0; i < n; ++i) out.u[i] = v_[i] + vd[i] - out.w - f_[i] * xi;

    if (config_.kappa > 0.0) {
        out.logc.resize(n);
        detail::centered_log_density(psi, out.logc);
    } else {
        out.logc.clear();
    }

    double rho_max = 0.0;
    for (const auto& c : psi) rho_max = std::max(rho_max, std::norm(c));
    const double eps = kDensityFloorRel * rho_max;
    double umax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (std::norm(psi[i]) >= eps) umax = std::max(umax, std::abs(out.u[i]));
    stability_ = config_.dt * umax / hbar;
}

void Propagator::apply_potential(std::vector<Complex>& psi, const Terms& terms, double tau) const
{
    const double c = tau / config_.params.hbar;
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -c * terms.u[i]);
    if (terms.logc.empty()) return;

    // Exponentiated measurement factor; the constant is fixed so the sub-step keeps the norm.
    const double s = config_.measurement_sign == MeasurementSign::localizing ? 1.0 : -1.0;
    const double a = s * config_.kappa * tau;
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        before += std::norm(psi[i]);
        psi[i] *= std::exp(a * terms.logc[i]);
        after += std::norm(psi[i]);
    }
    const double scale = std::sqrt(before / after);
    for (auto& z : psi) z *= scale;
}

void Propagator::step(SimState& state, double xi) const
{
    Terms start, mid;
    compute_terms(state.psi.values(), xi, start);
    last_w_ = start.w;

    std::vector<Complex> a = std::move(state.psi).release();
    apply_kinetic_half(a);
    std::vector<Complex> h = a;
    apply_potential(h, start, 0.5 * config_.dt);
    compute_terms(h, xi, mid);
    apply_potential(a, mid, config_.dt);
    apply_kinetic_half(a);

    state.psi = WaveFunction(config_.grid, std::move(a));
    state.t += config_.dt;
    ++state.noise_cursor;
}

SimState step(const SimState& state, const SimConfig& config, double xi_n)
{
    config.validate();
    if (!state.psi.all_finite()) throw Error(ErrorCode::NumericalBlowup, "non-finite wavefunction");
    const Propagator prop(config);
    SimState next = state;
    prop.step(next, xi_n);
    if (!next.psi.all_finite()) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "non-finite wavefunction at t=%.17g", next.t);
        throw Error(ErrorCode::NumericalBlowup, buf);
    }
    return next;
}

namespace {

struct Recorder {
    const SimConfig& config;
    RealField v, vp, fp;
    std::vector<double> fp2;
    bool boundary_warned = false;

    explicit Recorder(const SimConfig& c)
        : config(c),
          v(c.potential.sample(c.grid, 0, c.params.mass)),
          vp(c.potential.sample(c.grid, 1, c.params.mass)),
          fp(c.coupling.sample(c.grid, 1)),
          fp2(c.grid.size())
    {
        for (std::size_t i = 0; i < fp2.size(); ++i) fp2[i] = fp[i] * fp[i];
    }

    ObservableSet add(RunRecord& rec, const WaveFunction& psi, double t, double w, double xi)
    {
        const auto obs = observables(psi, v, config.params);
        auto& s = rec.series;
        s.t.push_back(t);
        s.norm.push_back(obs.norm);
        s.mean_x.push_back(obs.mean_x);
        s.mean_p.push_back(obs.mean_p);
        s.var_x.push_back(obs.var_x);
        s.energy.push_back(obs.energy);
        s.w.push_back(w);
        s.xi.push_back(xi);

        const auto d = differentiate(psi, 1);
        const double dx = config.grid.dx();
        const double c = config.params.hbar / config.params.mass;
        double flux = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) flux += fp2[i] * c * (std::conj(psi[i]) * d[i]).imag();
        rec.ehrenfest.mean_vprime.push_back(expectation(psi, vp));
        rec.ehrenfest.tilde_flux.push_back(flux * dx / obs.norm);
        rec.ehrenfest.mean_fprime.push_back(expectation(psi, fp));

        if (!boundary_warned && obs.boundary_density > 1e-6) {
            boundary_warned = true;
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "BoundaryContamination: boundary density %.3g of peak exceeds 1e-6 at t=%.6g",
                          obs.boundary_density, t);
            rec.warnings.emplace_back(buf);
        }
        return obs;
    }
};

} // namespace

RunRecord run(const SimConfig& config)
{
    config.validate();
    RunRecord rec;
    rec.noise = run_noise(config);
    const Propagator prop(config);
    Recorder recorder(config);

    SimState state{0.0, initial_wavefunction(config), 0};
    bool stability_warned = false;
    const auto snapshot = [&](std::size_t n) {
        if (config.snapshot_stride > 0 && n % config.snapshot_stride == 0)
            rec.snapshots.push_back({n, state.t, state.psi});
    };

    for (std::size_t n = 0; n < config.n_steps; ++n) {
        const double xi = rec.noise.values[n];
        recorder.add(rec, state.psi, state.t, 0.0, xi);
        snapshot(n);
        prop.step(state, xi);
        // W belongs to the row of the state the step started from.
        rec.series.w.back() = prop.last_w();
        if (!stability_warned && prop.last_stability_number() >= 0.5) {
            stability_warned = true;
            char buf[160];
            std::snprintf(buf, sizeof buf, "StabilityGuard: dt*max|U|/hbar = %.3g exceeds 0.5 at t=%.6g",
                          prop.last_stability_number(), rec.series.t.back());
            rec.warnings.emplace_back(buf);
        }
        state.t = static_cast<double>(n + 1) * config.dt;
        if (!state.psi.all_finite()) {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "non-finite wavefunction at t=%.17g; last stable: t=%.17g norm=%.17g mean_x=%.17g "
                          "mean_p=%.17g var_x=%.17g",
                          state.t, rec.series.t.back(), rec.series.norm.back(), rec.series.mean_x.back(),
                          rec.series.mean_p.back(), rec.series.var_x.back());
            throw Error(ErrorCode::NumericalBlowup, buf);
        }
    }
    const double w_end =
        dissipative_potential(state.psi, config.coupling, config.friction, config.params, config.sign).w;
    recorder.add(rec, state.psi, state.t, w_end, rec.noise.values[config.n_steps]);
    snapshot(config.n_steps);
    return rec;
}

std::vector<double> ehrenfest_residual(const RunRecord& record, const SimConfig& config)
{
    const auto& s = record.series;
    const auto& e = record.ehrenfest;
    const std::size_t n = s.size();
    if (n < 3 || e.mean_vprime.size() != n)
        throw Error(ErrorCode::InsufficientData, "Ehrenfest residual needs at least three recorded rows");
    const double m = config.params.mass;
    const double dt = config.dt;
    std::vector<double> r(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double acc = (s.mean_x[i + 1] - 2.0 * s.mean_x[i] + s.mean_x[i - 1]) / (dt * dt);
        const double xi = 0.5 * (s.xi[i - 1] + s.xi[i]);
        r[i - 1] = m * acc + m * config.friction * e.tilde_flux[i] + e.mean_vprime[i] - e.mean_fprime[i] * xi;
    }
    return r;
}

} // namespace gsle
