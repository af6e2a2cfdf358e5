#pragma once

// Geodesic boundary-value oracle: Dormand-Prince 5(4) integration of
// x'' = -Gamma^a_{mu nu} x'^mu x'^nu with adaptive steps, wrapped in a
// Newton shooting loop on the initial velocity.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/LU>

#include "oracles/riemann.hpp"

namespace oracle {

using gaugeqm::Vec;

struct Dopri5 {
    double rtol = 1e-12;
    double atol = 1e-13;

    template <class F>
    Vec integrate(const F& f, Vec y, double t0, double t1) const {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        double t = t0;
        double h = (t1 - t0) / 100;
        Vec k1 = f(t, y);
        while (t < t1) {
            if (t + h > t1) h = t1 - t;
            const Vec k2 = f(t + c2 * h, y + h * a21 * k1);
            const Vec k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
            const Vec k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const Vec k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Vec k6 =
                f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Vec k7 = f(t + h, y5);
            const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double norm = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double sc = atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
                norm = std::max(norm, std::abs(err(i)) / sc);
            }
            if (norm <= 1.0) {
                t += h;
                y = y5;
                k1 = k7;
            }
            const double fac = norm > 0 ? 0.9 * std::pow(norm, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
            if (h < 1e-14) throw std::runtime_error("dopri5 step underflow");
        }
        return y;
    }
};

/// Geodesic from x to y over parameter span T, sampled at `taus`.
inline std::vector<Vec> shoot_geodesic(const gaugeqm::ChartMetric& m, const Vec& x, const Vec& y,
                                       double T, const std::vector<double>& taus) {
    const int n = m.dim;
    auto rhs = [&](double, const Vec& s) {
        const Vec pos = s.head(n), vel = s.tail(n);
        const Rank3 G = christoffel_second(m, pos);
        Vec out(2 * n);
        out.head(n) = vel;
        for (int a = 0; a < n; ++a) out(n + a) = -vel.dot(G[a] * vel);
        return out;
    };
    const Dopri5 ode;
    auto endpoint = [&](const Vec& v0) {
        Vec s(2 * n);
        s << x, v0;
        return Vec(ode.integrate(rhs, s, 0.0, T).head(n));
    };
    Vec v = (y - x) / T;
    for (int it = 0; it < 50; ++it) {
        const Vec miss = endpoint(v) - y;
        if (miss.cwiseAbs().maxCoeff() < 1e-13) break;
        Mat J(n, n);
        for (int c = 0; c < n; ++c) {
            const double dv = 1e-7;
            J.col(c) = (endpoint(v + dv * gaugeqm::unit(n, c)) -
                        endpoint(v - dv * gaugeqm::unit(n, c))) /
                       (2 * dv);
        }
        v -= J.lu().solve(miss);
    }
    std::vector<Vec> out;
    for (double t : taus) {
        Vec s(2 * n);
        s << x, v;
        out.push_back(t <= 0 ? x : Vec(ode.integrate(rhs, s, 0.0, t).head(n)));
    }
    return out;
}

} // namespace oracle
