#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "gsle/error.hpp"
#include "gsle/grid.hpp"

namespace gsle {

using Complex = std::complex<double>;

/// Samples of a real or complex function on a Grid. Immutable once built.
template <typename T>
class Field {
public:
    Field(Grid grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values))
    {
        if (values_.size() != grid_.size())
            throw Error(ErrorCode::InvalidField, "field length does not match grid size");
    }

    static Field zeros(const Grid& grid) { return Field(grid, std::vector<T>(grid.size(), T{})); }

    template <typename F>
    static Field sample(const Grid& grid, F&& fn)
    {
        std::vector<T> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = fn(grid.x(j));
        return Field(grid, std::move(v));
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const T> values() const { return values_; }
    const T& operator[](std::size_t j) const { return values_[j]; }

    bool all_finite() const
    {
        for (const auto& v : values_) {
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return false;
            } else {
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
            }
        }
        return true;
    }

    /// Moves the samples out; the field is left empty.
    std::vector<T> release() && { return std::move(values_); }

private:
    Grid grid_;
    std::vector<T> values_;
};

using RealField = Field<double>;
using ComplexField = Field<Complex>;
using WaveFunction = ComplexField;

/// Relative density floor used wherever the Kostin functionals divide by |psi|^2.
inline constexpr double kDensityFloorRel = 1e-12;

struct ObservableSet {
    double norm = 0.0;
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double energy = 0.0;
    double boundary_density = 0.0;
};

enum class Boundary { periodic, open };

/// Periodic rectangle rule, sum(values) * dx.
double integrate(const RealField& field);

/// Running integral F_j = int_{x_0}^{x_j} g dx. Each cell is integrated with the interpolating
/// polynomial through eight neighbouring samples (degree-7 exact), or all samples when fewer.
/// `periodic` wraps the stencil around the grid ends; `open` uses one-sided end stencils.
std::vector<double> cumulative_integral(std::span<const double> g, double dx, Boundary boundary);

/// Spectral derivative of order 1 or 2.
ComplexField differentiate(const ComplexField& field, int order);
RealField differentiate(const RealField& field, int order);

RealField density(const WaveFunction& psi);
double norm(const WaveFunction& psi);
WaveFunction normalized(const WaveFunction& psi);
/// kDensityFloorRel * max |psi|^2.
double density_floor(std::span<const double> rho);

/// int obs |psi|^2 dx / int |psi|^2 dx.
double expectation(const WaveFunction& psi, const RealField& observable);

ObservableSet observables(const WaveFunction& psi, const RealField& potential, const PhysicalParams& params);

} // namespace gsle
