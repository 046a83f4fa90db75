#include "gsle/classical.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace gsle {

void LangevinConfig::validate() const
{
    params.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidParams, "dt must be positive");
    if (n_steps < 1) throw Error(ErrorCode::InvalidParams, "n_steps must be at least 1");
    if (n_particles < 1) throw Error(ErrorCode::InvalidParams, "n_particles must be at least 1");
    if (!(friction >= 0.0)) throw Error(ErrorCode::InvalidFriction, "friction must be non-negative");
    if (!(noise.temperature >= 0.0)) throw Error(ErrorCode::InvalidParams, "temperature must be non-negative");
    if (initial.sigma_x < 0.0 || initial.sigma_p < 0.0)
        throw Error(ErrorCode::InvalidParams, "cloud widths must be non-negative");
    if (memory) memory->validate();
}

namespace {

void check_finite(const PhasePoint& p)
{
    if (!std::isfinite(p.x) || !std::isfinite(p.v))
        throw Error(ErrorCode::NumericalBlowup, "non-finite classical trajectory");
}

} // namespace

PhasePoint langevin_step_generic(PhasePoint s, const LangevinConfig& config, double xi)
{
    const double m = config.params.mass;
    const double dt = config.dt;
    const auto& f = config.coupling;
    const double fp0 = f.eval(s.x, 1);
    const double gamma0 = config.friction * (fp0 * fp0);
    const double eta = fp0 * xi;
    const double force0 = -config.potential.eval(s.x, 1, m);

    const double v_half = s.v * (1.0 - 0.5 * dt * gamma0) + dt / (2.0 * m) * (force0 + eta);
    const double x1 = s.x + dt * v_half;
    const double fp1 = f.eval(x1, 1);
    const double gamma1 = config.friction * (fp1 * fp1);
    const double force1 = -config.potential.eval(x1, 1, m);
    const PhasePoint out{x1, (v_half + dt / (2.0 * m) * (force1 + eta)) / (1.0 + 0.5 * dt * gamma1)};
    check_finite(out);
    return out;
}

PhasePoint langevin_step(PhasePoint s, const LangevinConfig& config, double xi)
{
    if (!config.coupling.is_linear()) return langevin_step_generic(s, config, xi);

    const double m = config.params.mass;
    const double dt = config.dt;
    const double gamma = config.friction * (1.0 * 1.0);
    const double eta = 1.0 * xi;
    const double force0 = -config.potential.eval(s.x, 1, m);
    const double v_half = s.v * (1.0 - 0.5 * dt * gamma) + dt / (2.0 * m) * (force0 + eta);
    const double x1 = s.x + dt * v_half;
    const double force1 = -config.potential.eval(x1, 1, m);
    const PhasePoint out{x1, (v_half + dt / (2.0 * m) * (force1 + eta)) / (1.0 + 0.5 * dt * gamma)};
    check_finite(out);
    return out;
}

KernelTable tabulate_kernel(const BathSpec& bath, double dt, std::size_t n_steps, std::size_t cap)
{
    bath.validate();
    std::vector<double> a(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) a[k] = memory_kernel(bath, static_cast<double>(k) * dt);
    const double cut = 1e-4 * std::abs(a[0]);
    std::size_t last = 0;
    for (std::size_t k = 0; k <= n_steps; ++k)
        if (std::abs(a[k]) >= cut) last = k;
    if (last + 1 > cap)
        throw Error(ErrorCode::MemoryBudgetExceeded,
                    "memory kernel support of " + std::to_string(last + 1) + " samples exceeds the history cap of " +
                        std::to_string(cap));
    a.resize(last + 1);
    return {dt, std::move(a)};
}

GleState gle_start(PhasePoint initial, const LangevinConfig& config)
{
    GleState s;
    s.point = initial;
    s.history.push_back(config.coupling.eval(initial.x, 1) * initial.v);
    s.memory = 0.0;
    return s;
}

void gle_step(GleState& state, const LangevinConfig& config, const KernelTable& kernel, double xi)
{
    if (kernel.alpha.empty()) throw Error(ErrorCode::InsufficientData, "empty memory kernel");
    if (state.history.size() > config.history_cap)
        throw Error(ErrorCode::MemoryBudgetExceeded, "GLE history exceeds the configured cap");
    const double m = config.params.mass;
    const double dt = config.dt;
    const auto& f = config.coupling;
    const auto& a = kernel.alpha;
    const std::size_t support = a.size();

    const double x0 = state.point.x;
    const double fp0 = f.eval(x0, 1);
    const double eta = fp0 * xi;
    const double v_half =
        state.point.v + dt / (2.0 * m) * (-config.potential.eval(x0, 1, m) + eta - m * fp0 * state.memory);
    const double x1 = x0 + dt * v_half;
    const double fp1 = f.eval(x1, 1);

    // Known part of the memory integral at the new time: all stored samples g_0..g_n.
    const std::size_t n1 = state.history.size(); // index of the new time
    double known = 0.0;
    for (std::size_t j = (n1 >= support ? n1 - support + 1 : 0); j < n1; ++j) {
        const double w = j == 0 ? 0.5 : 1.0;
        known += w * a[n1 - j] * state.history[j];
    }
    known *= dt;

    const double rhs = v_half + dt / (2.0 * m) * (-config.potential.eval(x1, 1, m) + eta - m * fp1 * known);
    const double v1 = rhs / (1.0 + 0.25 * dt * dt * a[0] * fp1 * fp1);
    state.point = {x1, v1};
    state.history.push_back(fp1 * v1);
    state.memory = known + 0.5 * dt * a[0] * fp1 * v1;
    check_finite(state.point);
}

NoiseRealization particle_noise(const LangevinConfig& config, std::uint64_t seed)
{
    const auto& nc = config.noise;
    switch (nc.kind) {
    case NoiseKind::zero:
        return zero_noise(config.dt, config.n_steps);
    case NoiseKind::white:
        return white_noise(config.friction, nc.temperature, config.params.mass, config.dt, config.n_steps, seed);
    case NoiseKind::bath: {
        BathSpec bath;
        if (nc.bath) {
            bath = *nc.bath;
        } else if (config.memory) {
            bath = *config.memory;
        } else {
            OhmicSpec o = nc.ohmic;
            o.friction = config.friction;
            o.temperature = nc.temperature;
            bath = discretize_ohmic(o, config.params.mass);
        }
        const auto times = uniform_times(0.5 * config.dt, config.dt, config.n_steps);
        return sample_bath_noise(bath, nc.temperature, times, seed);
    }
    }
    throw Error(ErrorCode::InvalidParams, "unknown noise kind");
}

Trajectory langevin_trajectory(PhasePoint initial, const LangevinConfig& config, const NoiseRealization& noise)
{
    config.validate();
    if (noise.size() < config.n_steps) throw Error(ErrorCode::InsufficientData, "noise shorter than the run");
    Trajectory tr;
    tr.x.reserve(config.n_steps + 1);
    tr.v.reserve(config.n_steps + 1);
    tr.x.push_back(initial.x);
    tr.v.push_back(initial.v);
    if (config.memory) {
        const auto kernel = tabulate_kernel(*config.memory, config.dt, config.n_steps, config.history_cap);
        auto s = gle_start(initial, config);
        for (std::size_t n = 0; n < config.n_steps; ++n) {
            gle_step(s, config, kernel, noise.values[n]);
            tr.x.push_back(s.point.x);
            tr.v.push_back(s.point.v);
        }
    } else {
        PhasePoint p = initial;
        for (std::size_t n = 0; n < config.n_steps; ++n) {
            p = langevin_step(p, config, noise.values[n]);
            tr.x.push_back(p.x);
            tr.v.push_back(p.v);
        }
    }
    return tr;
}

namespace {

constexpr std::size_t kBlock = 64;

struct BlockSums {
    std::vector<double> sx, sxx, sv, svv;
    std::vector<PhasePoint> finals;
};

} // namespace

ClassicalEnsemble langevin_ensemble(const LangevinConfig& config, std::uint64_t seed, unsigned workers)
{
    config.validate();
    const std::size_t n_rows = config.n_steps + 1;
    const std::size_t n_blocks = (config.n_particles + kBlock - 1) / kBlock;
    std::vector<BlockSums> blocks(n_blocks);
    std::optional<KernelTable> kernel;
    if (config.memory) kernel = tabulate_kernel(*config.memory, config.dt, config.n_steps, config.history_cap);

    auto run_block = [&](std::size_t b) {
        BlockSums& s = blocks[b];
        s.sx.assign(n_rows, 0.0);
        s.sxx.assign(n_rows, 0.0);
        s.sv.assign(n_rows, 0.0);
        s.svv.assign(n_rows, 0.0);
        const std::size_t end = std::min(config.n_particles, (b + 1) * kBlock);
        for (std::size_t k = b * kBlock; k < end; ++k) {
            const std::uint64_t ps = derive_seed(seed, k);
            std::mt19937_64 rng(ps);
            std::normal_distribution<double> gauss(0.0, 1.0);
            const double m = config.params.mass;
            PhasePoint p{config.initial.x0 + config.initial.sigma_x * gauss(rng),
                         (config.initial.p0 + config.initial.sigma_p * gauss(rng)) / m};
            const auto noise = particle_noise(config, derive_seed(ps, 0));
            auto accumulate = [&](std::size_t row, const PhasePoint& q) {
                s.sx[row] += q.x;
                s.sxx[row] += q.x * q.x;
                s.sv[row] += q.v;
                s.svv[row] += q.v * q.v;
            };
            accumulate(0, p);
            if (kernel) {
                auto g = gle_start(p, config);
                for (std::size_t n = 0; n < config.n_steps; ++n) {
                    gle_step(g, config, *kernel, noise.values[n]);
                    accumulate(n + 1, g.point);
                }
                p = g.point;
            } else {
                for (std::size_t n = 0; n < config.n_steps; ++n) {
                    p = langevin_step(p, config, noise.values[n]);
                    accumulate(n + 1, p);
                }
            }
            if (config.keep_particles) s.finals.push_back(p);
        }
    };

    const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_blocks)));
    if (n_workers == 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t b; !failed && (b = next.fetch_add(1)) < n_blocks;) {
                    try {
                        run_block(b);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    ClassicalEnsemble out;
    out.times = uniform_times(0.0, config.dt, n_rows);
    out.n_particles = config.n_particles;
    const double n = static_cast<double>(config.n_particles);
    const double m = config.params.mass;
    std::vector<double> sx(n_rows, 0.0), sxx(n_rows, 0.0), sv(n_rows, 0.0), svv(n_rows, 0.0);
    for (const auto& b : blocks) {
        for (std::size_t r = 0; r < n_rows; ++r) {
            sx[r] += b.sx[r];
            sxx[r] += b.sxx[r];
            sv[r] += b.sv[r];
            svv[r] += b.svv[r];
        }
        out.final_particles.insert(out.final_particles.end(), b.finals.begin(), b.finals.end());
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        const double mx = sx[r] / n, mv = sv[r] / n;
        const double vx = std::max(0.0, sxx[r] / n - mx * mx);
        const double vv = std::max(0.0, svv[r] / n - mv * mv);
        out.mean_x.push_back(mx);
        out.mean_p.push_back(m * mv);
        out.var_x.push_back(vx);
        out.var_p.push_back(m * m * vv);
        const double bessel = n > 1.0 ? n / (n - 1.0) : 0.0;
        out.stderr_x.push_back(std::sqrt(vx * bessel / n));
        out.stderr_p.push_back(m * std::sqrt(vv * bessel / n));
    }
    return out;
}

} // namespace gsle
