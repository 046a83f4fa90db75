#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsle/coupling.hpp"
#include "gsle/field.hpp"

namespace gsle {

/// psi = A exp(iS/hbar). S is unwrapped outward from the density maximum; cells with
/// |psi|^2 below the density floor are masked and S is interpolated (interior runs) or
/// continued linearly from the two outermost unmasked cells (runs touching the grid ends).
struct PolarField {
    WaveFunction psi;
    RealField amplitude;
    RealField phase;
    std::vector<std::uint8_t> node_mask;
    double hbar = 1.0;

    WaveFunction reconstruct() const;
};

PolarField polar_decompose(const WaveFunction& psi, const PhysicalParams& params = {});

/// p = dS/dx, evaluated as hbar Im(psi'/psi) from the spectral derivative of psi outside the
/// mask and as the slope of the interpolated phase inside it.
RealField guiding_momentum(const PolarField& polar, const PhysicalParams& params = {});

struct TildePhaseForms {
    RealField integral_form; // m int J~/|psi|^2 dx = int f'^2 p dx
    RealField product_form;  // f'^2 S - 2 int S f' f'' dx
};

TildePhaseForms tilde_phase_forms(const PolarField& polar, const CouplingFunction& f,
                                  const PhysicalParams& params = {});
/// Coupling-dependent phase S~ (integral form).
RealField tilde_phase(const PolarField& polar, const CouplingFunction& f, const PhysicalParams& params = {});

/// <x|p|psi>/<x|psi> = dS/dx - i hbar (dA^2/dx) / (2 A^2). Masked cells hold quiet NaN.
struct WeakValueField {
    RealField real_part;
    RealField imag_part;
    std::vector<std::uint8_t> node_mask;
};

WeakValueField weak_value(const PolarField& polar, const PhysicalParams& params = {});

/// Periodic piecewise-linear density model on the grid cells; used both to sample initial
/// positions and as the reference CDF of the equivariance test.
class DensityCdf {
public:
    explicit DensityCdf(const WaveFunction& psi);

    double cdf(double x) const;
    double inverse(double u) const;

private:
    Grid grid_;
    std::vector<double> rho_;
    std::vector<double> cum_; // cumulative mass at cell starts, normalized
    double total_;
};

struct Snapshot {
    std::size_t step = 0;
    double t = 0.0;
    WaveFunction psi;
};

/// Guiding velocity p/m on the grid at uniformly spaced times.
struct VelocityHistory {
    Grid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> velocity;

    /// Cubic (four-point, periodic) in x, linear in t.
    double at(double x, double t) const;
};

VelocityHistory velocity_history(std::span<const Snapshot> history, const PhysicalParams& params = {});

struct TrajectoryEnsemble {
    std::vector<double> times;
    /// positions[k][i]: trajectory k at times[i], wrapped into [x_min, x_max).
    std::vector<std::vector<double>> positions;
};

/// Samples n_traj starting points from |psi(x, t_0)|^2 by inverse CDF and advances them with
/// RK4 on v = p/m, one step per snapshot interval split into `substeps`.
TrajectoryEnsemble propagate_trajectories(std::span<const Snapshot> history, std::size_t n_traj, std::uint64_t seed,
                                          const PhysicalParams& params = {}, int substeps = 1);
TrajectoryEnsemble propagate_trajectories(const VelocityHistory& velocity, const WaveFunction& initial,
                                          std::size_t n_traj, std::uint64_t seed, int substeps = 1);

/// Kolmogorov-Smirnov distance between trajectory positions at t_index and |psi_t|^2.
double equivariance_distance(const TrajectoryEnsemble& ensemble, const WaveFunction& psi_t, std::size_t t_index);

} // namespace gsle
