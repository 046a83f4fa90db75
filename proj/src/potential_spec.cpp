#include "gsle/potential_spec.hpp"

#include "gsle/spline.hpp"

namespace gsle {

PotentialSpec PotentialSpec::harmonic(double omega)
{
    PotentialSpec p;
    p.kind = Kind::harmonic;
    p.omega = omega;
    return p;
}

PotentialSpec PotentialSpec::linear_ramp(double slope)
{
    PotentialSpec p;
    p.kind = Kind::linear_ramp;
    p.slope = slope;
    return p;
}

PotentialSpec PotentialSpec::double_well(double a, double b)
{
    PotentialSpec p;
    p.kind = Kind::double_well;
    p.quartic = a;
    p.quadratic = b;
    return p;
}

PotentialSpec PotentialSpec::polynomial(std::vector<double> coefficients)
{
    PotentialSpec p;
    p.kind = Kind::polynomial;
    p.coefficients = std::move(coefficients);
    return p;
}

PotentialSpec PotentialSpec::tabulated(const Grid& grid, std::vector<double> values)
{
    if (values.size() != grid.size()) throw Error(ErrorCode::InvalidField, "tabulated potential size mismatch");
    PotentialSpec p;
    p.kind = Kind::tabulated;
    p.table_grid = grid;
    p.table = std::move(values);
    return p;
}

double PotentialSpec::eval(double x, int order, double mass) const
{
    if (order < 0 || order > 2) throw Error(ErrorCode::UnsupportedOrder, "potential derivative order must be 0..2");
    switch (kind) {
    case Kind::free: return 0.0;
    case Kind::harmonic: {
        const double k = mass * omega * omega;
        return order == 0 ? 0.5 * k * x * x : order == 1 ? k * x : k;
    }
    case Kind::linear_ramp: return order == 0 ? slope * x : order == 1 ? slope : 0.0;
    case Kind::double_well:
        if (order == 0) return quartic * x * x * x * x - quadratic * x * x;
        if (order == 1) return 4.0 * quartic * x * x * x - 2.0 * quadratic * x;
        return 12.0 * quartic * x * x - 2.0 * quadratic;
    case Kind::polynomial: {
        // Horner on the differentiated coefficient list.
        double acc = 0.0;
        for (std::size_t k = coefficients.size(); k-- > static_cast<std::size_t>(order);) {
            double c = coefficients[k];
            for (int d = 0; d < order; ++d) c *= static_cast<double>(k - static_cast<std::size_t>(d));
            acc = acc * x + c;
        }
        return acc;
    }
    case Kind::tabulated: {
        const CubicSpline s(table_grid->x_min(), table_grid->dx(), table);
        return s.eval(x, order);
    }
    }
    return 0.0;
}

RealField PotentialSpec::sample(const Grid& grid, int order, double mass) const
{
    if (kind == Kind::tabulated) {
        if (!table_grid || !(*table_grid == grid))
            throw Error(ErrorCode::InvalidField, "tabulated potential defined on a different grid");
        RealField v(grid, table);
        return order == 0 ? v : differentiate(v, order);
    }
    return RealField::sample(grid, [&](double x) { return eval(x, order, mass); });
}

} // namespace gsle
