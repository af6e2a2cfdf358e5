#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "gaugeqm/error.hpp"

namespace gaugeqm {

/// Least-squares slope of log|y| against log|x|.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorKind::invalid_argument,
            "slope fit needs at least two matching samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] != 0 && y[i] != 0, ErrorKind::invalid_argument,
                "slope fit samples must be nonzero");
        const double lx = std::log(std::abs(x[i]));
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    require(den != 0, ErrorKind::invalid_argument, "slope fit abscissae coincide");
    return (n * sxy - sx * sy) / den;
}

/// Order of accuracy from errors at successively halved steps.
inline double observed_order(double coarse, double fine, double refinement = 2.0) {
    return std::log(std::abs(coarse) / std::abs(fine)) / std::log(refinement);
}

/// Neville evaluation at x0 of the interpolating polynomial through (x_i, y_i);
/// with x0 = 0 this is Richardson extrapolation to the zero-step limit.
template <class T>
T neville(const std::vector<double>& x, std::vector<T> y, double x0 = 0.0) {
    require(x.size() == y.size() && !x.empty(), ErrorKind::invalid_argument,
            "extrapolation needs matching nonempty samples");
    const std::size_t n = x.size();
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = 0; i + level < n; ++i) {
            const double dx = x[i] - x[i + level];
            require(dx != 0, ErrorKind::invalid_argument, "extrapolation abscissae coincide");
            y[i] = ((x0 - x[i + level]) * y[i] - (x0 - x[i]) * y[i + 1]) / dx;
        }
    return y[0];
}

} // namespace gaugeqm
