#pragma once

// Curvature scalar by full contraction of the Riemann tensor, built from
// Christoffel symbols of the second kind that are differentiated
// numerically. Shares nothing with the library's closed-form bracket except
// the metric partials themselves.

#include "gaugeqm/geometry.hpp"

namespace oracle {

using gaugeqm::ChartMetric;
using gaugeqm::Mat;
using gaugeqm::Point;
using gaugeqm::Rank3;

/// Gamma^a_{mu nu} at x, stored as out[a](mu, nu).
inline Rank3 christoffel_second(const ChartMetric& m, const Point& x) {
    const int n = m.dim;
    const Mat g_inv = gaugeqm::metric_at(m, x).inverse();
    const Rank3 dg = gaugeqm::metric_first_partials(m, x);
    Rank3 out = gaugeqm::make_rank3(n);
    for (int a = 0; a < n; ++a)
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) {
                double s = 0.0;
                for (int b = 0; b < n; ++b)
                    s += g_inv(a, b) * (dg[mu](b, nu) + dg[nu](b, mu) - dg[b](mu, nu));
                out[a](mu, nu) = 0.5 * s;
            }
    return out;
}

/// R = g^{s n} R^r_{s r n} with
/// R^r_{s m n} = d_m G^r_{n s} - d_n G^r_{m s} + G^r_{m l} G^l_{n s} - G^r_{n l} G^l_{m s}.
inline double ricci_scalar(const ChartMetric& m, const Point& x, double h = 1e-4) {
    const int n = m.dim;
    const Rank3 G = christoffel_second(m, x);
    std::vector<Rank3> dG; // dG[c][a](mu, nu) = d_c G^a_{mu nu}
    for (int c = 0; c < n; ++c) {
        const Point e = h * gaugeqm::unit(n, c);
        const Rank3 gp = christoffel_second(m, x + e);
        const Rank3 gm = christoffel_second(m, x - e);
        Rank3 d = gaugeqm::make_rank3(n);
        for (int a = 0; a < n; ++a) d[a] = (gp[a] - gm[a]) / (2 * h);
        dG.push_back(d);
    }
    const Mat g_inv = gaugeqm::metric_at(m, x).inverse();
    double r = 0.0;
    for (int s = 0; s < n; ++s)
        for (int nu = 0; nu < n; ++nu) {
            double ric = 0.0;
            for (int rho = 0; rho < n; ++rho) {
                ric += dG[rho][rho](nu, s) - dG[nu][rho](rho, s);
                for (int l = 0; l < n; ++l)
                    ric += G[rho](rho, l) * G[l](nu, s) - G[rho](nu, l) * G[l](rho, s);
            }
            r += g_inv(s, nu) * ric;
        }
    return r;
}

} // namespace oracle
