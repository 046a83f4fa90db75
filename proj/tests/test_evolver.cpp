#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gsle/evolver.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gsle;
using testing::thrown_code;

namespace {

constexpr double kPi = std::numbers::pi;
const double kGroundSigma = std::sqrt(0.5);

SimConfig oscillator(double x0, double dt, double t_end)
{
    SimConfig c;
    c.potential = PotentialSpec::harmonic(1.0);
    c.initial = GaussianState{x0, 0.0, kGroundSigma};
    c.dt = dt;
    c.n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
    return c;
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool has_warning(const RunRecord& r, const std::string& prefix)
{
    return std::ranges::any_of(r.warnings, [&](const std::string& w) { return w.starts_with(prefix); });
}

} // namespace

TEST_SUITE("evolver")
{
    TEST_CASE("coherent state returns after one period")
    {
        const double period = 2.0 * kPi;
        const auto rec = run(oscillator(2.0, period / 2000.0, period));
        CHECK(rec.series.t.back() == doctest::Approx(period));
        CHECK(std::abs(rec.series.mean_x.back() - 2.0) < 1e-4);
        CHECK(std::abs(rec.series.mean_p.back()) < 1e-4);
    }

    TEST_CASE("free packet spreads as the closed form")
    {
        SimConfig c;
        c.initial = GaussianState{0.0, 0.0, 1.0};
        c.dt = 0.005;
        c.n_steps = 200;
        const auto rec = run(c);
        CHECK(std::abs(rec.series.var_x.back() - oracle::free_packet_variance(1.0, 1.0)) < 1e-4);
        CHECK(std::abs(rec.series.var_x.back() - 1.25) < 1e-4);
    }

    TEST_CASE("second order in dt on a dissipative problem")
    {
        auto mean_x_at = [](double dt) {
            auto c = oscillator(1.5, dt, 2.0);
            c.coupling = CouplingFunction::sinusoidal(1.0, 0.8);
            c.friction = 0.2;
            c.kappa = 0.05;
            return run(c).series.mean_x.back();
        };
        const double a = mean_x_at(0.02), b = mean_x_at(0.01), c = mean_x_at(0.005);
        const double ratio = std::abs(a - b) / std::abs(b - c);
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }

    TEST_CASE("a vanishing step leaves the observables alone")
    {
        auto c = oscillator(1.0, 1e-8, 1e-8);
        c.coupling = CouplingFunction::sinusoidal(1.0, 1.0);
        c.friction = 0.3;
        c.kappa = 0.1;
        const auto rec = run(c);
        REQUIRE(rec.series.size() == 2);
        const auto& s = rec.series;
        CHECK(std::abs(s.norm[1] - s.norm[0]) < 1e-7);
        CHECK(std::abs(s.mean_x[1] - s.mean_x[0]) < 1e-7);
        CHECK(std::abs(s.mean_p[1] - s.mean_p[0]) < 1e-7);
        CHECK(std::abs(s.var_x[1] - s.var_x[0]) < 1e-7);
        CHECK(std::abs(s.energy[1] - s.energy[0]) < 1e-7);
    }

    TEST_CASE("runs are bit-identical for the same seed")
    {
        auto c = oscillator(1.0, 0.005, 2.0);
        c.coupling = CouplingFunction::sinusoidal(1.0, 1.0);
        c.friction = 0.1;
        c.kappa = 0.02;
        c.noise.kind = NoiseKind::white;
        c.noise.temperature = 0.2;
        c.seed = 77;
        c.snapshot_stride = 100;
        const auto a = run(c), b = run(c);
        CHECK(a.series.mean_x == b.series.mean_x);
        CHECK(a.series.energy == b.series.energy);
        CHECK(a.series.xi == b.series.xi);
        CHECK(a.series.w == b.series.w);
        REQUIRE(a.snapshots.size() == b.snapshots.size());
        for (std::size_t k = 0; k < a.snapshots.size(); ++k)
            CHECK(testing::max_abs_diff(a.snapshots[k].psi.values(), b.snapshots[k].psi.values()) == 0.0);

        c.seed = 78;
        CHECK(run(c).series.mean_x != a.series.mean_x);
    }

    TEST_CASE("record layout")
    {
        auto c = oscillator(1.0, 0.01, 1.0);
        c.snapshot_stride = 30;
        const auto rec = run(c);
        const auto& s = rec.series;
        CHECK(s.size() == c.n_steps + 1);
        for (const auto* col : {&s.norm, &s.mean_x, &s.mean_p, &s.var_x, &s.energy, &s.w, &s.xi})
            CHECK(col->size() == s.size());
        CHECK(rec.ehrenfest.mean_vprime.size() == s.size());
        CHECK(rec.noise.size() == c.n_steps + 1);
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.t[i] > s.t[i - 1]);
        REQUIRE(rec.snapshots.size() == 4);
        CHECK(rec.snapshots[3].step == 90);
        CHECK(rec.snapshots[3].t == doctest::Approx(0.9));
    }

    TEST_CASE("Ehrenfest residual of a conservative run")
    {
        const auto c = oscillator(2.0, 0.001, 2.0);
        const auto rec = run(c);
        const auto r = ehrenfest_residual(rec, c);
        CHECK(r.size() == rec.series.size() - 2);
        CHECK(max_abs(r) < 1e-4 * max_abs(rec.ehrenfest.mean_vprime));
    }

    TEST_CASE("Ehrenfest residual with linear coupling and damping")
    {
        auto c = oscillator(2.0, 0.002, 2.0 * kPi);
        c.friction = 0.1;
        const auto r = ehrenfest_residual(run(c), c);
        CHECK(max_abs(r) < 1e-3 * 1.0 * 1.0 * 2.0);
    }

    TEST_CASE("the anti-damping orientation violates the damped balance")
    {
        auto c = oscillator(2.0, 0.002, 2.0 * kPi);
        c.friction = 0.1;
        const double damped = max_abs(ehrenfest_residual(run(c), c));
        c.sign = DampingSign::paper;
        const double flipped = max_abs(ehrenfest_residual(run(c), c));
        // the flipped run carries a 2 m friction <p> mismatch, of order 0.4 here
        CHECK(flipped > 0.1);
        CHECK(flipped > 100.0 * damped);
    }

    TEST_CASE("norm is conserved with every term active")
    {
        auto c = oscillator(1.0, 0.005, 10.0);
        c.coupling = CouplingFunction::sinusoidal(1.0, 1.0);
        c.friction = 0.2;
        c.kappa = 0.05;
        c.noise.kind = NoiseKind::white;
        c.noise.temperature = 0.1;
        c.seed = 3;
        const auto rec = run(c);
        double drift = 0.0;
        for (double n : rec.series.norm) drift = std::max(drift, std::abs(n - 1.0));
        CHECK(drift < 1e-6);
    }

    TEST_CASE("energy is conserved in the unitary limit")
    {
        auto drift = [](const RunRecord& rec, std::size_t from, std::size_t to) {
            const double e0 = rec.series.energy.front();
            double d = 0.0;
            for (std::size_t i = from; i < to; ++i) d = std::max(d, std::abs(rec.series.energy[i] - e0));
            return d;
        };
        const auto fine = run(oscillator(1.5, 1e-4, 1.0));
        REQUIRE(fine.series.size() == 10001);
        CHECK(drift(fine, 0, fine.series.size()) < 1e-8 * std::abs(fine.series.energy.front()));

        // coarser steps: a bounded O(dt^2) oscillation with no secular growth
        const auto a = run(oscillator(1.5, 0.01, 50.0));
        const auto b = run(oscillator(1.5, 0.005, 50.0));
        const std::size_t half = a.series.size() / 2;
        CHECK(drift(a, half, a.series.size()) < 1.1 * drift(a, 0, half));
        const double ratio = drift(a, 0, a.series.size()) / drift(b, 0, b.series.size());
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }

    TEST_CASE("a constant offset in the potential is a pure gauge")
    {
        auto c = oscillator(1.0, 0.005, 3.0);
        c.potential = PotentialSpec::polynomial({0.0, 0.0, 0.5});
        c.coupling = CouplingFunction::sinusoidal(1.0, 1.0);
        c.friction = 0.15;
        c.kappa = 0.05;
        c.noise.kind = NoiseKind::white;
        c.noise.temperature = 0.1;
        c.seed = 12;
        const auto a = run(c);
        c.potential = PotentialSpec::polynomial({7.5, 0.0, 0.5});
        const auto b = run(c);
        CHECK(testing::max_abs_diff(a.series.norm, b.series.norm) < 1e-10);
        CHECK(testing::max_abs_diff(a.series.mean_x, b.series.mean_x) < 1e-10);
        CHECK(testing::max_abs_diff(a.series.mean_p, b.series.mean_p) < 1e-10);
        CHECK(testing::max_abs_diff(a.series.var_x, b.series.var_x) < 1e-10);
        // W is referenced to the global phase, so it only agrees to the round-off of that phase
        CHECK(testing::max_abs_diff(a.series.w, b.series.w) < 1e-8);
    }

    TEST_CASE("harmonic eigenstates are stationary")
    {
        for (int n : {0, 1, 3}) {
            auto c = oscillator(0.0, 0.001, 1.0);
            c.initial = EigenstateState{n};
            const auto rec = run(c);
            const double e = n + 0.5;
            CHECK(rec.series.energy.front() == doctest::Approx(e).epsilon(1e-10));
            CHECK(rec.series.var_x.front() == doctest::Approx(e).epsilon(1e-10));
            CHECK(std::abs(rec.series.var_x.back() - e) < 1e-6);
            CHECK(std::abs(rec.series.mean_x.back()) < 1e-10);
        }
        SimConfig free;
        free.initial = EigenstateState{0};
        CHECK(thrown_code([&] { initial_wavefunction(free); }) == ErrorCode::InvalidParams);
    }

    TEST_CASE("explicit initial state")
    {
        SimConfig c;
        const auto g = testing::gaussian(c.grid, 0.5, 1.0, 0.8);
        c.initial = ExplicitState{{g.values().begin(), g.values().end()}};
        CHECK(testing::max_abs_diff(initial_wavefunction(c).values(), g.values()) < 1e-14);
        c.initial = ExplicitState{std::vector<Complex>(7)};
        CHECK(thrown_code([&] { initial_wavefunction(c); }) == ErrorCode::InvalidField);
    }

    TEST_CASE("single step matches the run")
    {
        auto c = oscillator(1.0, 0.01, 0.01);
        c.friction = 0.1;
        c.coupling = CouplingFunction::sinusoidal(1.0, 1.0);
        const SimState s0{0.0, initial_wavefunction(c), 0};
        const auto s1 = step(s0, c, 0.0);
        CHECK(s1.t == doctest::Approx(0.01));
        CHECK(s1.noise_cursor == 1);
        const auto rec = run(c);
        const auto o = observables(s1.psi, RealField::zeros(c.grid), c.params);
        CHECK(o.mean_x == doctest::Approx(rec.series.mean_x.back()).epsilon(1e-13));
    }

    TEST_CASE("stability and boundary warnings")
    {
        auto coarse = oscillator(0.0, 0.5, 1.0);
        CHECK(has_warning(run(coarse), "StabilityGuard"));
        CHECK_FALSE(has_warning(run(oscillator(0.0, 0.005, 0.05)), "StabilityGuard"));

        SimConfig edge;
        edge.initial = GaussianState{18.0, 0.0, 1.0};
        edge.n_steps = 2;
        CHECK(has_warning(run(edge), "BoundaryContamination"));
        CHECK_FALSE(has_warning(run(oscillator(0.0, 0.005, 0.01)), "BoundaryContamination"));
    }

    TEST_CASE("evolver errors")
    {
        auto with = [](auto edit) {
            return thrown_code([&] {
                SimConfig c;
                edit(c);
                run(c);
            });
        };
        CHECK(with([](SimConfig& c) { c.dt = 0.0; }) == ErrorCode::InvalidParams);
        CHECK(with([](SimConfig& c) { c.dt = -0.1; }) == ErrorCode::InvalidParams);
        CHECK(with([](SimConfig& c) { c.n_steps = 0; }) == ErrorCode::InvalidParams);
        CHECK(with([](SimConfig& c) { c.friction = -1.0; }) == ErrorCode::InvalidFriction);
        CHECK(with([](SimConfig& c) { c.kappa = -1.0; }) == ErrorCode::InvalidResolution);
        CHECK(with([](SimConfig& c) { c.noise.temperature = -1.0; }) == ErrorCode::InvalidParams);
        CHECK(with([](SimConfig& c) { c.initial = GaussianState{0.0, 0.0, 0.0}; }) == ErrorCode::InvalidParams);
        CHECK(with([](SimConfig& c) {
                  c.kappa = 1e6;
                  c.n_steps = 50;
              }) == ErrorCode::NumericalBlowup);

        try {
            SimConfig c;
            c.dt = 0.0;
            run(c);
        } catch (const Error& e) {
            CHECK(std::string(e.what()) == "dt must be positive");
        }

        SimConfig c;
        SimState bad{0.0, initial_wavefunction(c), 0};
        std::vector<Complex> v(bad.psi.values().begin(), bad.psi.values().end());
        v[10] = Complex(std::nan(""), 0.0);
        bad.psi = WaveFunction(c.grid, v);
        CHECK(thrown_code([&] { step(bad, c, 0.0); }) == ErrorCode::NumericalBlowup);

        c.n_steps = 1;
        CHECK(thrown_code([&] { ehrenfest_residual(run(c), c); }) == ErrorCode::InsufficientData);
    }
}
