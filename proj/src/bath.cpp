#include "gsle/bath.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gsle/error.hpp"

namespace gsle {

void BathSpec::validate() const
{
    if (oscillators.empty()) throw Error(ErrorCode::EmptyBath, "bath has no oscillators");
    if (!(system_mass > 0.0)) throw Error(ErrorCode::InvalidParams, "system mass must be positive");
    for (const auto& o : oscillators)
        if (!(o.mass > 0.0) || !(o.frequency > 0.0))
            throw Error(ErrorCode::InvalidParams, "bath oscillator mass and frequency must be positive");
}

double memory_kernel(const BathSpec& bath, double t)
{
    double sum = 0.0;
    for (const auto& o : bath.oscillators)
        sum += o.coupling * o.coupling / (o.mass * o.frequency * o.frequency) * std::cos(o.frequency * t);
    return sum / bath.system_mass;
}

BathSpec discretize_ohmic(const OhmicSpec& spec, double system_mass)
{
    if (spec.n_oscillators == 0) throw Error(ErrorCode::EmptyBath, "Ohmic bath needs at least one oscillator");
    if (spec.friction < 0.0) throw Error(ErrorCode::InvalidFriction, "friction must be non-negative");
    if (!(spec.cutoff > 0.0)) throw Error(ErrorCode::InvalidParams, "cutoff frequency must be positive");
    if (!(system_mass > 0.0)) throw Error(ErrorCode::InvalidParams, "system mass must be positive");

    BathSpec bath;
    bath.system_mass = system_mass;
    bath.oscillators.reserve(spec.n_oscillators);
    const double dw = spec.cutoff / static_cast<double>(spec.n_oscillators);
    const double mi = 1.0;
    const double scale = std::sqrt(2.0 * system_mass * spec.friction * mi * dw / std::numbers::pi);
    for (std::size_t i = 1; i <= spec.n_oscillators; ++i) {
        const double w = static_cast<double>(i) * dw;
        bath.oscillators.push_back({mi, w, w * scale});
    }
    return bath;
}

NoiseRealization sample_bath_noise(const BathSpec& bath, double temperature, std::span<const double> times,
                                   std::uint64_t seed)
{
    bath.validate();
    if (temperature < 0.0) throw Error(ErrorCode::InvalidParams, "temperature must be non-negative");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = bath.oscillators.size();
    std::vector<double> cos_amp(n), sin_amp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& o = bath.oscillators[i];
        const double q = gauss(rng) * std::sqrt(temperature / (o.mass * o.frequency * o.frequency));
        const double p = gauss(rng) * std::sqrt(o.mass * temperature);
        cos_amp[i] = -o.coupling * q;
        sin_amp[i] = -o.coupling * p / (o.mass * o.frequency);
    }

    NoiseRealization out;
    out.times.assign(times.begin(), times.end());
    out.values.resize(times.size());
    out.seed = seed;
    out.kind = NoiseKind::bath;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double xi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double wt = bath.oscillators[i].frequency * times[k];
            xi += cos_amp[i] * std::cos(wt) + sin_amp[i] * std::sin(wt);
        }
        out.values[k] = xi;
    }
    return out;
}

NoiseRealization white_noise(double friction, double temperature, double system_mass, double dt,
                             std::size_t n_steps, std::uint64_t seed)
{
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParams, "dt must be positive");
    if (friction < 0.0) throw Error(ErrorCode::InvalidFriction, "friction must be non-negative");
    if (temperature < 0.0) throw Error(ErrorCode::InvalidParams, "temperature must be non-negative");

    NoiseRealization out;
    out.times = uniform_times(0.0, dt, n_steps);
    out.values.assign(n_steps, 0.0);
    out.seed = seed;
    out.kind = NoiseKind::white;
    const double sigma = std::sqrt(2.0 * system_mass * friction * temperature / dt);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : out.values) v = sigma * gauss(rng);
    return out;
}

NoiseRealization zero_noise(double dt, std::size_t n_steps)
{
    NoiseRealization out;
    out.times = uniform_times(0.0, dt, n_steps);
    out.values.assign(n_steps, 0.0);
    return out;
}

std::vector<double> uniform_times(double t0, double dt, std::size_t n)
{
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = t0 + static_cast<double>(k) * dt;
    return t;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace gsle
