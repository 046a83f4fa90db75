#pragma once

#include <span>

#include "gsle/coupling.hpp"
#include "gsle/field.hpp"
#include "gsle/potential_spec.hpp"

namespace gsle {

/// Sign of the Kostin functional. `damping` (+m alpha int J~/|psi|^2) reproduces the averaged
/// Langevin equation with friction; `paper` is the literal minus sign, which anti-damps.
enum class DampingSign { damping, paper };

inline double sign_factor(DampingSign s) { return s == DampingSign::damping ? 1.0 : -1.0; }

struct DissipativeTerms {
    RealField v_d;
    double w = 0.0; // <V_d>, the gauge term subtracted by the evolver
};

/// Every state-dependent potential entering the wave equation, evaluated on one state.
struct GsleTerms {
    RealField v_d;
    double w = 0.0;
    RealField v_r;
    ComplexField w_kappa;
    RealField q;
};

/// J = (hbar/m) Im(psi* dpsi/dx).
RealField current(const WaveFunction& psi, const PhysicalParams& params);

/// J~ = f'(x)^2 J.
RealField tilde_current(const WaveFunction& psi, const CouplingFunction& f, const PhysicalParams& params);

/// V_d(x) = s m friction int_{x_min}^x J~ / max(|psi|^2, eps) dx', W = <V_d>.
DissipativeTerms dissipative_potential(const WaveFunction& psi, const CouplingFunction& f, double friction,
                                       const PhysicalParams& params, DampingSign sign = DampingSign::damping);

/// V_r = -f(x) xi.
RealField random_potential(const CouplingFunction& f, double xi, const Grid& grid);

/// W_kappa = -i hbar kappa (ln|psi|^2 - <ln|psi|^2>), purely imaginary.
ComplexField measurement_potential(const WaveFunction& psi, double kappa, const PhysicalParams& params);

/// Q = -(hbar^2/2m) A''/A with A = |psi|.
RealField quantum_potential(const WaveFunction& psi, const PhysicalParams& params);

GsleTerms gsle_terms(const WaveFunction& psi, const CouplingFunction& f, double friction, double xi, double kappa,
                     const PhysicalParams& params, DampingSign sign = DampingSign::damping);

/// Closed form -2 gup_alpha p(x) V(x) with p the guiding momentum.
RealField gup_damping_closed_form(const WaveFunction& psi, const PotentialSpec& potential, double gup_alpha,
                                  const PhysicalParams& params);

/// The same damping through the generic route: -2 gup_alpha S~ with S~ = m int J~/|psi|^2 for
/// f = gup_coupling(V).
RealField gup_damping_generic(const WaveFunction& psi, const PotentialSpec& potential, double gup_alpha,
                              const PhysicalParams& params);

struct GupDiscrepancy {
    RealField closed_form;
    RealField generic;
    /// Largest |closed - generic| after removing the density-weighted mean of each, over the
    /// region where |psi|^2 exceeds 1e-8 of its maximum.
    double max_abs_diff = 0.0;
    double rms_diff = 0.0;
    /// Scale of the generic field on the same region, for relative reporting.
    double generic_scale = 0.0;
};

GupDiscrepancy gup_discrepancy(const WaveFunction& psi, const PotentialSpec& potential, double gup_alpha,
                               const PhysicalParams& params);

namespace detail {

/// Fills `v_d` with s m friction int J~/max(rho, eps) from psi and its spectral derivative;
/// returns W = <V_d>. `fprime_sq` may be empty (linear coupling).
double dissipative_into(std::span<const Complex> psi, std::span<const Complex> dpsi,
                        std::span<const double> fprime_sq, double scale, double hbar, double dx,
                        std::span<double> v_d);

/// Fills `out` with ln max(rho, eps) - <ln max(rho, eps)>.
void centered_log_density(std::span<const Complex> psi, std::span<double> out);

} // namespace detail

} // namespace gsle
