#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gsle/bohmian.hpp"
#include "gsle/potentials.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gsle;
using testing::thrown_code;

namespace {

constexpr double kPi = std::numbers::pi;

WaveFunction plane_wave(const Grid& g, int cycles)
{
    const double k = 2.0 * kPi * cycles / g.length();
    return normalized(WaveFunction::sample(g, [&](double x) { return std::polar(1.0, k * x); }));
}

// Gaussian with a quadratic phase, so the guiding momentum varies across the packet.
WaveFunction chirped(const Grid& g, double x0, double p0, double sigma, double chirp)
{
    return normalized(WaveFunction::sample(g, [&](double x) {
        const double d = x - x0;
        return std::exp(Complex(-d * d / (4.0 * sigma * sigma), p0 * x + 0.5 * chirp * d * d));
    }));
}

} // namespace

TEST_SUITE("potentials")
{
    TEST_CASE("probability current")
    {
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params;
        const auto real = testing::gaussian(g, 0.5, 0.0, 1.0);
        const auto j_real = current(real, params);
        for (double j : j_real.values()) CHECK(std::abs(j) < 1e-14);

        const auto pw = plane_wave(g, 3);
        const double k = 2.0 * kPi * 3 / g.length();
        const auto j_plane = current(pw, params);
        for (double j : j_plane.values()) CHECK(std::abs(j - k / g.length()) < 1e-12);

        const auto moving = testing::gaussian(g, -1.0, 1.3, 0.8);
        const double flux = integrate(current(moving, params));
        CHECK(std::abs(flux - 1.3) < 1e-8);
        CHECK(std::abs(flux - observables(moving, RealField::zeros(g), params).mean_p) < 1e-10);

        const PhysicalParams heavy{0.5, 2.0};
        const auto h = testing::gaussian(g, 0.0, 0.9, 1.0, heavy.hbar);
        CHECK(std::abs(integrate(current(h, heavy)) * heavy.mass - 0.9) < 1e-8);
    }

    TEST_CASE("coupling-weighted current")
    {
        const Grid g(-10.0, 10.0, 256);
        const PhysicalParams params;
        const auto psi = chirped(g, 0.5, 0.7, 1.2, 0.3);
        const auto j = current(psi, params);
        const auto jl = tilde_current(psi, CouplingFunction::linear(), params);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(jl[i] == j[i]);
        const auto j_const = tilde_current(psi, CouplingFunction::constant(3.0), params);
        for (double v : j_const.values()) CHECK(v == 0.0);

        const auto pw = plane_wave(g, 2);
        const double k = 2.0 * kPi * 2 / g.length();
        const auto jq = tilde_current(pw, CouplingFunction::power(2), params);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            CHECK(std::abs(jq[i] - 4.0 * x * x * k / g.length()) < 1e-11);
        }
    }

    TEST_CASE("friction potential special cases")
    {
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params;
        const auto psi = testing::gaussian(g, 0.0, 1.0, 1.0);
        const auto zero = dissipative_potential(psi, CouplingFunction::linear(), 0.0, params);
        for (double v : zero.v_d.values()) CHECK(v == 0.0);
        CHECK(zero.w == 0.0);
        CHECK(thrown_code([&] { dissipative_potential(psi, CouplingFunction::linear(), -0.1, params); }) ==
              ErrorCode::InvalidFriction);

        const auto pw = plane_wave(g, 5);
        const double k = 2.0 * kPi * 5 / g.length();
        const auto d = dissipative_potential(pw, CouplingFunction::linear(), 0.2, params);
        for (std::size_t i = 0; i < g.size(); ++i)
            CHECK(std::abs((d.v_d[i] - d.v_d[0]) - 0.2 * k * (g.x(i) - g.x_min())) < 1e-10);
    }

    TEST_CASE("friction potential of a moving Gaussian is linear in x")
    {
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params;
        const double p0 = 0.8;
        const auto psi = testing::gaussian(g, 1.0, p0, 1.0);
        const auto d = dissipative_potential(psi, CouplingFunction::linear(), 0.1, params);
        const auto rho = density(psi);
        double rmax = 0.0;
        for (double r : rho.values()) rmax = std::max(rmax, r);
        const double mean_x = observables(psi, RealField::zeros(g), params).mean_x;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (rho[i] < 1e-6 * rmax) continue;
            CHECK(std::abs((d.v_d[i] - d.w) - 0.1 * p0 * (g.x(i) - mean_x)) < 1e-6);
        }
        CHECK(std::abs(expectation(psi, d.v_d) - d.w) < 1e-10);
    }

    TEST_CASE("literal sign flips the friction potential")
    {
        const Grid g(-20.0, 20.0, 512);
        const auto psi = chirped(g, 0.0, 0.5, 1.0, 0.2);
        const auto f = CouplingFunction::sinusoidal(1.0, 0.5);
        const auto a = dissipative_potential(psi, f, 0.1, {}, DampingSign::damping);
        const auto b = dissipative_potential(psi, f, 0.1, {}, DampingSign::paper);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(a.v_d[i] == -b.v_d[i]);
        CHECK(a.w == -b.w);
    }

    TEST_CASE("friction potential reduces to alpha S for linear coupling")
    {
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params;
        const auto psi = chirped(g, -0.5, 0.6, 1.1, 0.4);
        const auto d = dissipative_potential(psi, CouplingFunction::linear(), 0.1, params);
        const auto polar = polar_decompose(psi, params);
        const auto rho = density(psi);
        double rmax = 0.0;
        for (double r : rho.values()) rmax = std::max(rmax, r);
        const double mean_s = expectation(psi, polar.phase);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (rho[i] < 1e-6 * rmax) continue;
            CHECK(std::abs((d.v_d[i] - d.w) - 0.1 * (polar.phase[i] - mean_s)) < 1e-6);
        }
    }

    TEST_CASE("mean friction force matches the weighted flux")
    {
        // <-dV_d/dx> = -m friction int J~ dx; the derivative of V_d is taken with the DFT
        // oracle after removing the ramp that makes V_d periodic.
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params{1.0, 1.5};
        const auto psi = chirped(g, 1.0, 0.7, 1.0, 0.3);
        const auto f = CouplingFunction::sinusoidal(1.0, 1.0);
        const auto d = dissipative_potential(psi, f, 0.1, params);
        const std::size_t n = g.size();
        const double end = 2.0 * d.v_d[n - 1] - d.v_d[n - 2];
        const double slope = (end - d.v_d[0]) / g.length();
        std::vector<oracle::cplx> periodic(n);
        for (std::size_t i = 0; i < n; ++i) periodic[i] = d.v_d[i] - slope * (g.x(i) - g.x_min());
        const auto dv = oracle::dft_derivative(periodic, g.length(), 1);
        const auto rho = density(psi);
        double force = 0.0;
        for (std::size_t i = 0; i < n; ++i) force -= rho[i] * (dv[i].real() + slope) * g.dx();
        const double flux = integrate(tilde_current(psi, f, params));
        CHECK(force == doctest::Approx(-params.mass * 0.1 * flux).epsilon(1e-8));
    }

    TEST_CASE("random potential")
    {
        const Grid g(0.0, 8.0 * kPi, 256);
        const auto v_zero = random_potential(CouplingFunction::linear(), 0.0, g);
        for (double v : v_zero.values()) CHECK(v == 0.0);
        const auto lin = random_potential(CouplingFunction::linear(), 2.0, g);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(lin[i] == -2.0 * g.x(i));
        const auto s = random_potential(CouplingFunction::sinusoidal(1.0, 1.0), 1.0, g);
        const auto ds = differentiate(s, 1);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(-ds[i] - std::cos(g.x(i))) < 1e-10);
    }

    TEST_CASE("measurement potential")
    {
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params{1.0, 1.0};
        const auto psi = testing::gaussian(g, 0.0, 0.0, 1.0);
        const auto w_zero = measurement_potential(psi, 0.0, params);
        for (const auto& v : w_zero.values()) CHECK(v == Complex(0.0, 0.0));

        const auto flat = normalized(WaveFunction::sample(g, [](double) { return Complex(1.0, 0.0); }));
        const auto w_flat = measurement_potential(flat, 0.3, params);
        for (const auto& v : w_flat.values()) CHECK(std::abs(v) < 1e-12);

        const double kappa = 0.4;
        const auto w = measurement_potential(psi, kappa, params);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            if (std::abs(x) > 5.0) continue;
            CHECK(w[i].real() == 0.0);
            CHECK(std::abs(w[i].imag() - kappa * (x * x - 1.0) / 2.0) < 1e-6);
        }
        CHECK(thrown_code([&] { measurement_potential(psi, -1.0, params); }) == ErrorCode::InvalidResolution);
    }

    TEST_CASE("measurement potential has zero mean")
    {
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params{0.7, 1.0};
        const auto psi = chirped(g, 2.0, -0.4, 0.8, 0.5);
        const double kappa = 0.25;
        const auto w = measurement_potential(psi, kappa, params);
        std::vector<double> im(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(w[i].real() == 0.0);
            im[i] = w[i].imag();
        }
        CHECK(std::abs(expectation(psi, RealField(g, im)) / (params.hbar * kappa)) < 1e-10);
    }

    TEST_CASE("quantum potential")
    {
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params;
        const auto q_plane = quantum_potential(plane_wave(g, 4), params);
        for (double q : q_plane.values()) CHECK(std::abs(q) < 1e-10);

        const auto psi = testing::gaussian(g, 0.0, 0.0, 1.0);
        const auto q = quantum_potential(psi, params);
        CHECK(std::abs(q[g.size() / 2] - 0.25) < 1e-6);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            if (std::abs(x) < 4.0) CHECK(std::abs(q[i] - (0.25 - x * x / 8.0)) < 1e-6);
        }

        // stationary harmonic ground state: Q + V = E0
        const auto ground = testing::gaussian(g, 0.0, 0.0, std::sqrt(0.5));
        const auto qg = quantum_potential(ground, params);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            if (std::abs(x) < 3.0) CHECK(std::abs(qg[i] + 0.5 * x * x - 0.5) < 1e-6);
        }
    }

    TEST_CASE("quantum potential ignores a global phase")
    {
        const Grid g(-20.0, 20.0, 512);
        const auto psi = chirped(g, 0.3, 0.5, 1.0, 0.2);
        const auto q = quantum_potential(psi, {});
        for (double theta : {kPi / 2.0, kPi}) {
            std::vector<Complex> v(psi.values().begin(), psi.values().end());
            const Complex phase = theta == kPi ? Complex(-1.0, 0.0) : Complex(0.0, 1.0);
            for (auto& c : v) c *= phase;
            const auto q2 = quantum_potential(WaveFunction(g, v), {});
            for (std::size_t i = 0; i < g.size(); ++i) CHECK(q2[i] == q[i]);
        }
    }

    TEST_CASE("combined terms agree with the individual functionals")
    {
        const Grid g(-20.0, 20.0, 512);
        const PhysicalParams params;
        const auto psi = chirped(g, 0.0, 0.4, 1.0, 0.3);
        const auto f = CouplingFunction::sinusoidal(0.5, 1.0);
        const auto t = gsle_terms(psi, f, 0.2, 1.5, 0.1, params);
        const auto d = dissipative_potential(psi, f, 0.2, params);
        const auto r = random_potential(f, 1.5, g);
        const auto w = measurement_potential(psi, 0.1, params);
        const auto q = quantum_potential(psi, params);
        CHECK(t.w == d.w);
        CHECK(std::abs(expectation(psi, t.v_d) - t.w) < 1e-10);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(t.v_d[i] == d.v_d[i]);
            CHECK(t.v_r[i] == r[i]);
            CHECK(t.w_kappa[i] == w[i]);
            CHECK(t.q[i] == q[i]);
        }
        CHECK(thrown_code([&] { gsle_terms(psi, f, 0.2, std::nan(""), 0.1, params); }) == ErrorCode::InvalidField);
    }

    TEST_CASE("closed-form GUP damping")
    {
        const Grid g(0.0, 40.0, 512);
        const PhysicalParams params;
        const auto ramp = PotentialSpec::linear_ramp(1.0);
        const auto at_rest = gup_damping_closed_form(testing::gaussian(g, 20.0, 0.0, 1.0), ramp, 0.1, params);
        // round-off only, amplified by 1/|psi| in the far tails
        for (double v : at_rest.values())
            CHECK(std::abs(v) < 1e-8);
        const auto flat_v = gup_damping_closed_form(testing::gaussian(g, 20.0, 1.0, 1.0), PotentialSpec::free_particle(), 0.1, params);
        for (double v : flat_v.values())
            CHECK(v == 0.0);

        const auto pw = plane_wave(g, 6);
        const double k = 2.0 * kPi * 6 / g.length();
        const auto c = gup_damping_closed_form(pw, ramp, 0.1, params);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(c[i] + 2.0 * 0.1 * k * g.x(i)) < 1e-10);
        CHECK(thrown_code([&] { gup_damping_generic(pw, PotentialSpec::linear_ramp(-1.0), 0.1, params); }) ==
              ErrorCode::NonmonotonePotential);
    }

    TEST_CASE("GUP routes agree for uniform momentum and differ under a chirp")
    {
        // On a ramp the two routes differ by int p' V dx, which vanishes when p is constant.
        const Grid g(0.0, 40.0, 512);
        const PhysicalParams params;
        const auto ramp = PotentialSpec::linear_ramp(1.0);
        const auto uniform = gup_discrepancy(testing::gaussian(g, 20.0, 0.8, 1.5), ramp, 0.1, params);
        CHECK(uniform.generic_scale > 0.1);
        CHECK(uniform.max_abs_diff < 1e-8 * uniform.generic_scale);

        const auto chirp = gup_discrepancy(chirped(g, 20.0, 0.8, 1.5, 0.3), ramp, 0.1, params);
        CHECK(chirp.max_abs_diff > 1e-2 * chirp.generic_scale);
        CHECK(std::isfinite(chirp.rms_diff));
    }
}
