#include "gsle/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace gsle {

CouplingFunction CouplingFunction::linear() { return {}; }

CouplingFunction CouplingFunction::constant(double c)
{
    CouplingFunction f;
    f.kind_ = Kind::constant;
    f.a_ = c;
    return f;
}

CouplingFunction CouplingFunction::power(int n)
{
    if (n < 0) throw Error(ErrorCode::InvalidParams, "power coupling exponent must be non-negative");
    CouplingFunction f;
    f.kind_ = Kind::power;
    f.n_ = n;
    return f;
}

CouplingFunction CouplingFunction::sinusoidal(double amplitude, double wavenumber)
{
    CouplingFunction f;
    f.kind_ = Kind::sinusoidal;
    f.a_ = amplitude;
    f.k_ = wavenumber;
    return f;
}

CouplingFunction CouplingFunction::tabulated(double x0, double h, std::vector<double> f)
{
    CouplingFunction c;
    c.kind_ = Kind::tabulated;
    c.tables_ = std::make_shared<const Tables>(Tables{CubicSpline(x0, h, std::move(f)), std::nullopt, std::nullopt});
    return c;
}

CouplingFunction CouplingFunction::tabulated(double x0, double h, std::vector<double> f, std::vector<double> fp,
                                             std::vector<double> fpp)
{
    if (fp.size() != f.size() || fpp.size() != f.size())
        throw Error(ErrorCode::InvalidField, "coupling tables must have equal length");
    CouplingFunction c;
    c.kind_ = Kind::tabulated;
    c.tables_ = std::make_shared<const Tables>(Tables{CubicSpline(x0, h, std::move(f)),
                                                      CubicSpline(x0, h, std::move(fp)),
                                                      CubicSpline(x0, h, std::move(fpp))});
    return c;
}

double CouplingFunction::eval(double x, int order) const
{
    if (order < 0 || order > 2) throw Error(ErrorCode::UnsupportedOrder, "coupling order must be 0, 1 or 2");
    switch (kind_) {
    case Kind::linear: return order == 0 ? x : order == 1 ? 1.0 : 0.0;
    case Kind::constant: return order == 0 ? a_ : 0.0;
    case Kind::power: {
        if (order > n_) return 0.0;
        double coef = 1.0;
        for (int d = 0; d < order; ++d) coef *= static_cast<double>(n_ - d);
        return coef * std::pow(x, n_ - order);
    }
    case Kind::sinusoidal: {
        const double kx = k_ * x;
        if (order == 0) return a_ * std::sin(kx);
        if (order == 1) return a_ * k_ * std::cos(kx);
        return -a_ * k_ * k_ * std::sin(kx);
    }
    case Kind::tabulated: {
        const Tables& t = *tables_;
        if (order == 1 && t.fp) return t.fp->eval(x);
        if (order == 2 && t.fpp) return t.fpp->eval(x);
        return t.f.eval(x, order);
    }
    }
    return 0.0;
}

RealField CouplingFunction::sample(const Grid& grid, int order) const
{
    return RealField::sample(grid, [&](double x) { return eval(x, order); });
}

std::vector<double> CouplingFunction::table() const { return tables_ ? tables_->f.knots_y() : std::vector<double>{}; }
double CouplingFunction::table_x0() const { return tables_ ? tables_->f.x_front() : 0.0; }
double CouplingFunction::table_h() const
{
    if (!tables_) return 0.0;
    const auto n = tables_->f.knots_y().size();
    return (tables_->f.x_back() - tables_->f.x_front()) / static_cast<double>(n - 1);
}

bool CouplingFunction::operator==(const CouplingFunction& other) const
{
    if (kind_ != other.kind_ || a_ != other.a_ || k_ != other.k_ || n_ != other.n_) return false;
    if (!tables_ || !other.tables_) return tables_ == other.tables_;
    const auto same = [](const std::optional<CubicSpline>& a, const std::optional<CubicSpline>& b) {
        if (a.has_value() != b.has_value()) return false;
        return !a || (a->x_front() == b->x_front() && a->x_back() == b->x_back() && a->knots_y() == b->knots_y());
    };
    return same(tables_->f, other.tables_->f) && same(tables_->fp, other.tables_->fp) &&
           same(tables_->fpp, other.tables_->fpp);
}

double eval_coupling(const CouplingFunction& f, double x, int order) { return f.eval(x, order); }

CouplingFunction gup_coupling(const PotentialSpec& potential, const Grid& grid, double mass)
{
    const auto vp = potential.sample(grid, 1, mass);
    const auto vpp = potential.sample(grid, 2, mass);
    const std::size_t n = grid.size();

    double scale = 0.0;
    for (double v : vp.values()) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale;

    std::vector<double> fp(n), fpp(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = vp[j];
        if (d < -tol)
            throw Error(ErrorCode::NonmonotonePotential,
                        "V' < 0 at x = " + std::to_string(grid.x(j)) + "; sqrt(V') coupling undefined");
        d = std::max(d, 0.0);
        fp[j] = std::sqrt(d);
        fpp[j] = fp[j] > 0.0 ? vpp[j] / (2.0 * fp[j]) : 0.0;
    }

    auto f = cumulative_integral(fp, grid.dx(), Boundary::open);
    // Anchor f(0) = 0; the origin may lie outside the table (shifted domains).
    const CubicSpline raw(grid.x_min(), grid.dx(), f);
    const double offset = raw.eval(0.0, 0, /*extrapolate=*/true);
    for (double& v : f) v -= offset;
    return CouplingFunction::tabulated(grid.x_min(), grid.dx(), std::move(f), std::move(fp), std::move(fpp));
}

} // namespace gsle
