#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gsle {

struct Oscillator {
    double mass = 1.0;
    double frequency = 1.0;
    double coupling = 0.0; // d_i

    bool operator==(const Oscillator&) const = default;
};

/// Discrete harmonic bath seen by a system particle of mass `system_mass`.
struct BathSpec {
    std::vector<Oscillator> oscillators;
    double system_mass = 1.0;

    void validate() const;
    bool operator==(const BathSpec&) const = default;
};

/// Ohmic continuum (constant friction up to a sharp cutoff), k_B absorbed into the temperature.
struct OhmicSpec {
    double friction = 0.0;
    double cutoff = 50.0;
    std::size_t n_oscillators = 500;
    double temperature = 0.0;

    bool operator==(const OhmicSpec&) const = default;
};

enum class NoiseKind { zero, white, bath };

/// Sampled random force xi(t_n) on a uniform time axis.
struct NoiseRealization {
    std::vector<double> times;
    std::vector<double> values;
    std::uint64_t seed = 0;
    NoiseKind kind = NoiseKind::zero;

    std::size_t size() const { return values.size(); }
};

/// alpha(t) = (1/m) sum_i d_i^2 / (m_i w_i^2) cos(w_i t).
double memory_kernel(const BathSpec& bath, double t);

/// Equally spaced w_i = i dw (i = 1..N, dw = cutoff/N), m_i = 1,
/// d_i = w_i sqrt(2 m friction m_i dw / pi). The kernel approaches 2 friction delta(t).
BathSpec discretize_ohmic(const OhmicSpec& spec, double system_mass);

/// xi(t) = -sum_i d_i [q_i cos(w_i t) + p_i/(m_i w_i) sin(w_i t)] with thermal
/// q_i ~ N(0, T/(m_i w_i^2)) (shifted bath coordinate) and p_i ~ N(0, m_i T).
NoiseRealization sample_bath_noise(const BathSpec& bath, double temperature, std::span<const double> times,
                                   std::uint64_t seed);

/// i.i.d. N(0, 2 m friction T / dt) values, held constant over each step of length dt.
NoiseRealization white_noise(double friction, double temperature, double system_mass, double dt,
                             std::size_t n_steps, std::uint64_t seed);

NoiseRealization zero_noise(double dt, std::size_t n_steps);

std::vector<double> uniform_times(double t0, double dt, std::size_t n);

/// Deterministic child seed (splitmix64 of master and index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

} // namespace gsle
