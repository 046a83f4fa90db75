#include "gsle/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "gsle/bohmian.hpp"

namespace gsle {

namespace detail {

double dissipative_into(std::span<const Complex> psi, std::span<const Complex> dpsi,
                        std::span<const double> fprime_sq, double scale, double hbar, double dx,
                        std::span<double> v_d)
{
    const std::size_t n = psi.size();
    double rho_max = 0.0;
    for (const auto& c : psi) rho_max = std::max(rho_max, std::norm(c));
    const double eps = kDensityFloorRel * rho_max;

    // m J~/rho = f'^2 hbar Im(psi* psi') / rho
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double rho = std::norm(psi[j]);
        double v = hbar * (std::conj(psi[j]) * dpsi[j]).imag() / std::max(rho, eps);
        if (!fprime_sq.empty()) v *= fprime_sq[j];
        g[j] = v;
    }
    const auto cum = cumulative_integral(g, dx, Boundary::open);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        v_d[j] = scale * cum[j];
        const double rho = std::norm(psi[j]);
        num += rho * v_d[j];
        den += rho;
    }
    return den > 0.0 ? num / den : 0.0;
}

void centered_log_density(std::span<const Complex> psi, std::span<double> out)
{
    double rho_max = 0.0;
    for (const auto& c : psi) rho_max = std::max(rho_max, std::norm(c));
    const double eps = kDensityFloorRel * rho_max;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double rho = std::norm(psi[j]);
        out[j] = std::log(std::max(rho, eps));
        num += rho * out[j];
        den += rho;
    }
    const double mean = num / den;
    for (double& v : out) v -= mean;
}

} // namespace detail

RealField current(const WaveFunction& psi, const PhysicalParams& params)
{
    const auto d = differentiate(psi, 1);
    std::vector<double> j(psi.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        j[i] = params.hbar / params.mass * (std::conj(psi[i]) * d[i]).imag();
    return RealField(psi.grid(), std::move(j));
}

RealField tilde_current(const WaveFunction& psi, const CouplingFunction& f, const PhysicalParams& params)
{
    auto j = current(psi, params);
    if (f.is_linear()) return j;
    const auto fp = f.sample(psi.grid(), 1);
    auto v = std::move(j).release();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= fp[i] * fp[i];
    return RealField(psi.grid(), std::move(v));
}

DissipativeTerms dissipative_potential(const WaveFunction& psi, const CouplingFunction& f, double friction,
                                       const PhysicalParams& params, DampingSign sign)
{
    if (friction < 0.0) throw Error(ErrorCode::InvalidFriction, "friction must be non-negative");
    const Grid& g = psi.grid();
    if (friction == 0.0) return {RealField::zeros(g), 0.0};

    const auto d = differentiate(psi, 1);
    std::vector<double> fp2;
    if (!f.is_linear()) {
        const auto fp = f.sample(g, 1);
        fp2.resize(g.size());
        for (std::size_t i = 0; i < fp2.size(); ++i) fp2[i] = fp[i] * fp[i];
    }
    std::vector<double> v(g.size());
    const double w = detail::dissipative_into(psi.values(), d.values(), fp2, sign_factor(sign) * friction,
                                              params.hbar, g.dx(), v);
    return {RealField(g, std::move(v)), w};
}

RealField random_potential(const CouplingFunction& f, double xi, const Grid& grid)
{
    if (!std::isfinite(xi)) throw Error(ErrorCode::InvalidField, "noise value must be finite");
    return RealField::sample(grid, [&](double x) { return -f.eval(x, 0) * xi; });
}

ComplexField measurement_potential(const WaveFunction& psi, double kappa, const PhysicalParams& params)
{
    if (kappa < 0.0) throw Error(ErrorCode::InvalidResolution, "measurement resolution kappa must be >= 0");
    const Grid& g = psi.grid();
    if (kappa == 0.0) return ComplexField::zeros(g);
    std::vector<double> l(g.size());
    detail::centered_log_density(psi.values(), l);
    std::vector<Complex> w(g.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = Complex(0.0, -params.hbar * kappa * l[i]);
    return ComplexField(g, std::move(w));
}

RealField quantum_potential(const WaveFunction& psi, const PhysicalParams& params)
{
    const Grid& g = psi.grid();
    std::vector<double> a(g.size());
    double a_max = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::hypot(psi[i].real(), psi[i].imag());
        a_max = std::max(a_max, a[i]);
    }
    const double floor = std::sqrt(kDensityFloorRel) * a_max;
    const auto a2 = differentiate(RealField(g, a), 2);
    const double c = -params.hbar * params.hbar / (2.0 * params.mass);
    std::vector<double> q(g.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = c * a2[i] / std::max(a[i], floor);
    return RealField(g, std::move(q));
}

GsleTerms gsle_terms(const WaveFunction& psi, const CouplingFunction& f, double friction, double xi, double kappa,
                     const PhysicalParams& params, DampingSign sign)
{
    auto d = dissipative_potential(psi, f, friction, params, sign);
    return {std::move(d.v_d), d.w, random_potential(f, xi, psi.grid()), measurement_potential(psi, kappa, params),
            quantum_potential(psi, params)};
}

RealField gup_damping_closed_form(const WaveFunction& psi, const PotentialSpec& potential, double gup_alpha,
                                  const PhysicalParams& params)
{
    const Grid& g = psi.grid();
    // Only the monotonicity check matters here; the coupling itself is unused.
    (void)gup_coupling(potential, g, params.mass);
    const auto p = guiding_momentum(polar_decompose(psi, params), params);
    const auto v = potential.sample(g, 0, params.mass);
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -2.0 * gup_alpha * p[i] * v[i];
    return RealField(g, std::move(out));
}

RealField gup_damping_generic(const WaveFunction& psi, const PotentialSpec& potential, double gup_alpha,
                              const PhysicalParams& params)
{
    const auto f = gup_coupling(potential, psi.grid(), params.mass);
    const auto s_tilde = tilde_phase(polar_decompose(psi, params), f, params);
    std::vector<double> out(psi.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -2.0 * gup_alpha * s_tilde[i];
    return RealField(psi.grid(), std::move(out));
}

GupDiscrepancy gup_discrepancy(const WaveFunction& psi, const PotentialSpec& potential, double gup_alpha,
                               const PhysicalParams& params)
{
    GupDiscrepancy r{gup_damping_closed_form(psi, potential, gup_alpha, params),
                     gup_damping_generic(psi, potential, gup_alpha, params)};
    const auto rho = density(psi);
    double rho_max = 0.0;
    for (double v : rho.values()) rho_max = std::max(rho_max, v);
    const double cut = 1e-8 * rho_max;

    double sc = 0.0, sg = 0.0, sw = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        sc += rho[i] * r.closed_form[i];
        sg += rho[i] * r.generic[i];
        sw += rho[i];
    }
    const double mc = sc / sw, mg = sg / sw;
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < cut) continue;
        const double d = (r.closed_form[i] - mc) - (r.generic[i] - mg);
        r.max_abs_diff = std::max(r.max_abs_diff, std::abs(d));
        r.generic_scale = std::max(r.generic_scale, std::abs(r.generic[i] - mg));
        sq += d * d;
        ++count;
    }
    r.rms_diff = count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
    return r;
}

} // namespace gsle
