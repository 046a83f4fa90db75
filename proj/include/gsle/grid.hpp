#pragma once

#include <cstddef>
#include <vector>

namespace gsle {

/// Uniform periodic grid x_j = x_min + j*dx, j = 0..n-1; x_max is identified with x_min.
class Grid {
public:
    Grid(double x_min, double x_max, std::size_t n_points);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return n_; }
    double dx() const { return dx_; }
    double length() const { return x_max_ - x_min_; }
    double x(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx_; }

    std::vector<double> points() const;
    /// Angular wavenumbers in FFT order (0, 1, .., n/2-1, -n/2, .., -1) * 2pi/L.
    std::vector<double> wavenumbers() const;

    bool operator==(const Grid&) const = default;

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
    double dx_;
};

struct PhysicalParams {
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const;
    bool operator==(const PhysicalParams&) const = default;
};

} // namespace gsle
