#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gsle/bath.hpp"
#include "gsle/coupling.hpp"
#include "gsle/evolver.hpp"
#include "gsle/potential_spec.hpp"

namespace gsle {

struct CloudInit {
    double x0 = 0.0;
    double p0 = 0.0;
    double sigma_x = 0.0;
    double sigma_p = 0.0;

    bool operator==(const CloudInit&) const = default;
};

struct LangevinConfig {
    PhysicalParams params;
    PotentialSpec potential;
    CouplingFunction coupling = CouplingFunction::linear();
    double friction = 0.0;
    NoiseConfig noise;
    double dt = 0.005;
    std::size_t n_steps = 1;
    std::size_t n_particles = 1;
    CloudInit initial;
    /// Memory kernel for gle_step; Markovian friction when empty.
    std::optional<BathSpec> memory;
    /// Largest number of kernel samples gle_step may hold.
    std::size_t history_cap = 1u << 20;
    bool keep_particles = false;

    void validate() const;
    bool operator==(const LangevinConfig&) const = default;
};

struct PhasePoint {
    double x = 0.0;
    double v = 0.0;
};

/// Semi-implicit velocity Verlet for m x'' + m friction f'(x)^2 x' + V'(x) = f'(x) xi, with the
/// noise force evaluated at the start-of-step position and xi held constant over dt.
PhasePoint langevin_step(PhasePoint state, const LangevinConfig& config, double xi);
/// Always the multiplicative path; langevin_step shortcuts linear couplings to the same arithmetic.
PhasePoint langevin_step_generic(PhasePoint state, const LangevinConfig& config, double xi);

/// Integrator state for the memory equation: the current point, the history of f'(x) v, and the
/// memory integral at the current time.
struct GleState {
    PhasePoint point;
    std::vector<double> history;
    double memory = 0.0;
};

/// Tabulated kernel alpha(k dt), truncated after the last sample with |alpha| >= 1e-4 alpha(0)
/// within `n_steps` steps.
struct KernelTable {
    double dt = 0.0;
    std::vector<double> alpha;
};

KernelTable tabulate_kernel(const BathSpec& bath, double dt, std::size_t n_steps, std::size_t cap);

GleState gle_start(PhasePoint initial, const LangevinConfig& config);
/// m v' = -V' + f' xi - m f'(x) int_0^t alpha(t-s) f'(x(s)) v(s) ds with a trapezoidal memory
/// integral; the current-time end point is treated implicitly.
void gle_step(GleState& state, const LangevinConfig& config, const KernelTable& kernel, double xi);

/// Noise sequence of length n_steps for one particle.
NoiseRealization particle_noise(const LangevinConfig& config, std::uint64_t seed);

/// Positions and velocities at t_n = n dt, n = 0..n_steps.
struct Trajectory {
    std::vector<double> x;
    std::vector<double> v;
};

Trajectory langevin_trajectory(PhasePoint initial, const LangevinConfig& config, const NoiseRealization& noise);

struct ClassicalEnsemble {
    std::vector<double> times;
    std::vector<double> mean_x, mean_p, var_x, var_p;
    std::vector<double> stderr_x, stderr_p;
    std::vector<PhasePoint> final_particles; // only with keep_particles
    std::size_t n_particles = 0;
};

/// Particle k starts from and is driven by streams derived from (seed, k); results do not depend on
/// `workers`.
ClassicalEnsemble langevin_ensemble(const LangevinConfig& config, std::uint64_t seed, unsigned workers = 1);

} // namespace gsle
