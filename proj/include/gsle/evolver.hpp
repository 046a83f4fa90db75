#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gsle/bath.hpp"
#include "gsle/bohmian.hpp"
#include "gsle/coupling.hpp"
#include "gsle/fft.hpp"
#include "gsle/field.hpp"
#include "gsle/potential_spec.hpp"
#include "gsle/potentials.hpp"

namespace gsle {

/// Orientation of the continuous-measurement term. `localizing` evolves as
/// dpsi/dt = +kappa (ln rho - <ln rho>) psi and narrows the packet; `paper` uses the
/// opposite orientation, which broadens it.
enum class MeasurementSign { localizing, paper };

struct NoiseConfig {
    NoiseKind kind = NoiseKind::zero;
    double temperature = 0.0;
    /// Used for `bath` when no explicit oscillator list is given; its friction is ignored
    /// in favour of SimConfig::friction.
    OhmicSpec ohmic;
    std::optional<BathSpec> bath;

    bool operator==(const NoiseConfig&) const = default;
};

struct GaussianState {
    double x0 = 0.0;
    double p0 = 0.0;
    double sigma = 0.7071067811865476; // position standard deviation

    bool operator==(const GaussianState&) const = default;
};

/// n-th eigenstate of the harmonic potential of the run.
struct EigenstateState {
    int index = 0;

    bool operator==(const EigenstateState&) const = default;
};

/// Samples supplied by the caller on the simulation grid.
struct ExplicitState {
    std::vector<Complex> values;

    bool operator==(const ExplicitState&) const = default;
};

using InitialState = std::variant<GaussianState, EigenstateState, ExplicitState>;

struct SimConfig {
    Grid grid{-20.0, 20.0, 512};
    PhysicalParams params;
    PotentialSpec potential;
    CouplingFunction coupling = CouplingFunction::linear();
    double friction = 0.0;
    NoiseConfig noise;
    double kappa = 0.0;
    double dt = 0.005;
    std::size_t n_steps = 1;
    std::uint64_t seed = 0;
    DampingSign sign = DampingSign::damping;
    MeasurementSign measurement_sign = MeasurementSign::localizing;
    InitialState initial = GaussianState{};
    /// Keep psi every `snapshot_stride` steps (0 disables snapshots).
    std::size_t snapshot_stride = 0;

    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

struct SimState {
    double t = 0.0;
    WaveFunction psi;
    std::size_t noise_cursor = 0;
};

/// One row per recorded time t_n = n dt, n = 0..n_steps. `xi[n]` and `w[n]` are the values
/// in force over the step that starts at t_n.
struct ObservableSeries {
    std::vector<double> t, norm, mean_x, mean_p, var_x, energy, w, xi;

    std::size_t size() const { return t.size(); }
};

/// Expectation values entering the averaged Langevin balance, on the same rows.
struct EhrenfestSeries {
    std::vector<double> mean_vprime;  // <V'>
    std::vector<double> tilde_flux;   // int J~ dx = <f'^2 xdot>
    std::vector<double> mean_fprime;  // <f'>
};

struct RunRecord {
    ObservableSeries series;
    EhrenfestSeries ehrenfest;
    std::vector<Snapshot> snapshots;
    std::vector<std::string> warnings;
    NoiseRealization noise;
};

WaveFunction initial_wavefunction(const SimConfig& config);

/// The noise sequence a run uses: n_steps + 1 values, bath noise sampled at step midpoints.
NoiseRealization run_noise(const SimConfig& config);

/// Strang-split propagator with one predictor-corrector pass for the state-dependent terms.
class Propagator {
public:
    explicit Propagator(const SimConfig& config);

    /// Advances `state` by one dt with random force xi held constant over the step.
    void step(SimState& state, double xi) const;

    /// dt * max |V + V_d - W + V_r| / hbar over the support of the last step's predictor state.
    double last_stability_number() const { return stability_; }
    /// W of the state the last step started from.
    double last_w() const { return last_w_; }

private:
    struct Terms {
        std::vector<double> u;     // V + V_d - W + V_r
        std::vector<double> logc;  // centered log density (empty when kappa == 0)
        double w = 0.0;
    };

    void compute_terms(std::span<const Complex> psi, double xi, Terms& out) const;
    void apply_potential(std::vector<Complex>& psi, const Terms& terms, double tau) const;
    void apply_kinetic_half(std::vector<Complex>& psi) const;

    const SimConfig& config_;
    Fft fft_;
    std::vector<Complex> kinetic_half_;
    std::vector<double> k_;
    std::vector<double> v_;
    std::vector<double> f_;
    std::vector<double> fp2_; // empty for linear coupling
    mutable double stability_ = 0.0;
    mutable double last_w_ = 0.0;
};

SimState step(const SimState& state, const SimConfig& config, double xi_n);

RunRecord run(const SimConfig& config);

/// r_n = m d^2<x>/dt^2 + m friction int J~ dx + <V'> - <f'> xi at interior rows, with
/// central differences in time and xi averaged over the two adjacent steps.
std::vector<double> ehrenfest_residual(const RunRecord& record, const SimConfig& config);

} // namespace gsle
