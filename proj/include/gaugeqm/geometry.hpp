#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gaugeqm/error.hpp"
#include "gaugeqm/linalg.hpp"

namespace gaugeqm {

enum class Signature { positive_definite, lorentzian };
enum class DerivativeMode { analytic, central_difference };

/// Second partials of the metric: ddg[a][b](mu, nu) = d_a d_b g_{mu nu}.
using MetricHessian = std::vector<Rank3>;

/// A coordinate chart with its metric components. Analytic partials are
/// optional; without them the chart always differentiates numerically.
struct ChartMetric {
    int dim = 0;
    Signature signature = Signature::positive_definite;
    std::string name;
    std::function<Mat(const Point&)> components;
    std::function<Rank3(const Point&)> first_partials;
    std::function<MetricHessian(const Point&)> second_partials;
    std::function<bool(const Point&)> in_domain;
    DerivativeMode mode = DerivativeMode::analytic;
    double h_first = 1e-5;
    double h_second = 1e-4;

    bool has_analytic_partials() const {
        return static_cast<bool>(first_partials) && static_cast<bool>(second_partials);
    }
};

/// Same chart, forced onto central differences with the given steps.
inline ChartMetric with_central_differences(ChartMetric m, double h_first = 1e-5,
                                            double h_second = 1e-4) {
    require(h_first > 0 && h_second > 0, ErrorKind::invalid_argument,
            "finite-difference steps must be positive");
    m.mode = DerivativeMode::central_difference;
    m.h_first = h_first;
    m.h_second = h_second;
    return m;
}

namespace detail {

inline void check_point(const ChartMetric& m, const Point& x) {
    require(x.size() == m.dim, ErrorKind::invalid_argument,
            "point dimension " + std::to_string(x.size()) + " does not match chart dimension " +
                std::to_string(m.dim));
    require(!m.in_domain || m.in_domain(x), ErrorKind::outside_chart,
            "point outside the valid region of chart '" + m.name + "'");
}

inline Rank3 fd_first(const ChartMetric& m, const Point& x) {
    const int n = m.dim;
    const double h = m.h_first;
    Rank3 d = make_rank3(n);
    for (int a = 0; a < n; ++a) {
        const Vec e = h * unit(n, a);
        d[a] = (m.components(x + e) - m.components(x - e)) / (2 * h);
    }
    return d;
}

inline MetricHessian fd_second(const ChartMetric& m, const Point& x) {
    const int n = m.dim;
    const double h = m.h_second;
    MetricHessian dd(n, make_rank3(n));
    const Mat g0 = m.components(x);
    for (int a = 0; a < n; ++a) {
        const Vec ea = h * unit(n, a);
        dd[a][a] = (m.components(x + ea) - 2 * g0 + m.components(x - ea)) / (h * h);
        for (int b = a + 1; b < n; ++b) {
            const Vec eb = h * unit(n, b);
            const Mat mixed = (m.components(x + ea + eb) - m.components(x + ea - eb) -
                               m.components(x - ea + eb) + m.components(x - ea - eb)) /
                              (4 * h * h);
            dd[a][b] = mixed;
            dd[b][a] = mixed;
        }
    }
    return dd;
}

} // namespace detail

/// Metric components at x, validated for symmetry.
inline Mat metric_at(const ChartMetric& m, const Point& x) {
    detail::check_point(m, x);
    Mat g = m.components(x);
    require(g.rows() == m.dim && g.cols() == m.dim, ErrorKind::invalid_metric,
            "components have wrong shape");
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    require((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorKind::invalid_metric,
            "metric components are not symmetric");
    return g;
}

inline Rank3 metric_first_partials(const ChartMetric& m, const Point& x) {
    detail::check_point(m, x);
    if (m.mode == DerivativeMode::analytic && m.first_partials) return m.first_partials(x);
    return detail::fd_first(m, x);
}

inline MetricHessian metric_second_partials(const ChartMetric& m, const Point& x) {
    detail::check_point(m, x);
    if (m.mode == DerivativeMode::analytic && m.second_partials) return m.second_partials(x);
    return detail::fd_second(m, x);
}

/// Checks the declared signature at x: Cholesky for positive-definite charts,
/// exactly one sign change across the sorted spectrum for lorentzian ones.
inline bool signature_holds(const ChartMetric& m, const Point& x) {
    const Mat g = metric_at(m, x);
    if (m.signature == Signature::positive_definite) {
        for (int k = 1; k <= m.dim; ++k)
            if (g.topLeftCorner(k, k).determinant() <= 0) return false;
        return true;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec ev = es.eigenvalues();
    int negatives = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) < 1e-14) return false;
        if (ev(i) < 0) ++negatives;
    }
    return negatives == 1 || negatives == m.dim - 1;
}

/// Alternative index/sign readings of the quartic coefficient in the
/// short-time expansion. Only `selected` solves the Hamilton-Jacobi equation
/// through fourth order; the others exist so that choice stays testable.
enum class QuarticForm {
    selected,          ///< (1/12)[2 g_{mn,le} - g^{ab} G_{mna} G_{leb}]
    printed,           ///< (1/12)[g^{ab} G_{mna} G_{mnb} - 2 g_{mn,le}]
    printed_reindexed, ///< (1/12)[g^{ab} G_{mna} G_{leb} - 2 g_{mn,le}]
};

/// Local geometry at one chart point. Christoffel symbols of the first kind
/// use gamma_first[a](mu, nu) = Gamma_{mu nu a}, symmetric in (mu, nu).
struct GeometryJet {
    Point point;
    Mat g;
    Mat g_inv;
    double det_g = 0.0;
    Rank3 dg;
    MetricHessian ddg;
    Rank3 gamma_first;
    Rank3 gamma_second; ///< gamma_second[a](mu, nu) = Gamma^a_{mu nu}
    Vec theta;          ///< Theta_mu = g^{nu lambda} Gamma_{mu nu lambda}
    Rank4 a_tensor;
    double ricci_scalar = 0.0;

    int dim() const { return static_cast<int>(g.rows()); }
    double gamma(int mu, int nu, int a) const { return gamma_first[a](mu, nu); }
};

/// A_{mu nu lambda eta} under one of the quartic readings, symmetrized over
/// (mu <-> nu) and (lambda <-> eta).
inline Rank4 quartic_coefficients(const GeometryJet& j, QuarticForm form) {
    const int n = j.dim();
    Rank4 raw(n);
    for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu)
            for (int la = 0; la < n; ++la)
                for (int et = 0; et < n; ++et) {
                    double gg = 0.0;
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b) {
                            const double second = form == QuarticForm::printed
                                                      ? j.gamma(mu, nu, b)
                                                      : j.gamma(la, et, b);
                            gg += j.g_inv(a, b) * j.gamma(mu, nu, a) * second;
                        }
                    const double d2 = j.ddg[la][et](mu, nu);
                    raw(mu, nu, la, et) = form == QuarticForm::selected ? (2 * d2 - gg) / 12.0
                                                                        : (gg - 2 * d2) / 12.0;
                }
    Rank4 a(n);
    for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu)
            for (int la = 0; la < n; ++la)
                for (int et = 0; et < n; ++et)
                    a(mu, nu, la, et) = 0.25 * (raw(mu, nu, la, et) + raw(nu, mu, la, et) +
                                                raw(mu, nu, et, la) + raw(nu, mu, et, la));
    return a;
}

/// Full metric jet at x. Throws degenerate-metric when |det g| < 1e-14 and
/// invalid-metric for non-symmetric components.
inline GeometryJet metric_jet(const ChartMetric& m, const Point& x) {
    GeometryJet j;
    j.point = x;
    j.g = metric_at(m, x);
    j.det_g = j.g.determinant();
    require(std::abs(j.det_g) >= 1e-14, ErrorKind::degenerate_metric,
            "metric determinant vanishes at the requested point");
    j.g_inv = j.g.inverse();
    j.dg = metric_first_partials(m, x);
    j.ddg = metric_second_partials(m, x);

    const int n = m.dim;
    j.gamma_first = make_rank3(n);
    for (int a = 0; a < n; ++a)
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu)
                j.gamma_first[a](mu, nu) =
                    0.5 * (j.dg[nu](mu, a) + j.dg[mu](nu, a) - j.dg[a](mu, nu));

    j.gamma_second = make_rank3(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) j.gamma_second[a] += j.g_inv(a, b) * j.gamma_first[b];

    j.theta = Vec::Zero(n);
    for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu)
            for (int la = 0; la < n; ++la) j.theta(mu) += j.g_inv(nu, la) * j.gamma(mu, nu, la);

    j.a_tensor = quartic_coefficients(j, QuarticForm::selected);

    // Bracketed closed form in first-kind symbols and plain second partials.
    // As written it is the negative of g^{nl} R^m_{nml}; flipped so the
    // sphere comes out positive.
    double bracket = 0.0;
    for (int al = 0; al < n; ++al)
        for (int ga = 0; ga < n; ++ga)
            for (int nu = 0; nu < n; ++nu)
                for (int la = 0; la < n; ++la) {
                    double term = j.ddg[al][ga](nu, la) - j.ddg[ga][la](al, nu);
                    for (int mu = 0; mu < n; ++mu)
                        for (int be = 0; be < n; ++be)
                            term += j.g_inv(mu, be) * (j.gamma(al, ga, be) * j.gamma(nu, la, mu) -
                                                       j.gamma(al, nu, mu) * j.gamma(ga, la, be));
                    bracket += j.g_inv(al, ga) * j.g_inv(nu, la) * term;
                }
    j.ricci_scalar = -bracket;
    return j;
}

/// sqrt|det g(x)|, the density of the invariant measure.
inline double invariant_measure(const ChartMetric& m, const Point& x) {
    const double det = metric_at(m, x).determinant();
    require(std::abs(det) >= 1e-14, ErrorKind::degenerate_metric,
            "metric determinant vanishes at the requested point");
    return std::sqrt(std::abs(det));
}

/// Pullback under the affine chart change x = J x' + b.
inline ChartMetric affine_pullback(const ChartMetric& m, const Mat& jac, const Vec& shift) {
    require(jac.rows() == m.dim && jac.cols() == m.dim && shift.size() == m.dim,
            ErrorKind::invalid_argument, "affine map has wrong shape");
    require(std::abs(jac.determinant()) > 1e-14, ErrorKind::invalid_argument,
            "affine map is singular");
    ChartMetric out = m;
    out.name = m.name + "@affine";
    auto to_base = [jac, shift](const Point& xp) -> Point { return jac * xp + shift; };
    out.components = [m, jac, to_base](const Point& xp) -> Mat {
        return jac.transpose() * m.components(to_base(xp)) * jac;
    };
    if (m.in_domain)
        out.in_domain = [m, to_base](const Point& xp) { return m.in_domain(to_base(xp)); };
    if (m.has_analytic_partials()) {
        const int n = m.dim;
        out.first_partials = [m, jac, to_base, n](const Point& xp) {
            const Rank3 d = m.first_partials(to_base(xp));
            Rank3 r = make_rank3(n);
            for (int a = 0; a < n; ++a) {
                Mat s = Mat::Zero(n, n);
                for (int c = 0; c < n; ++c) s += jac(c, a) * d[c];
                r[a] = jac.transpose() * s * jac;
            }
            return r;
        };
        out.second_partials = [m, jac, to_base, n](const Point& xp) {
            const MetricHessian dd = m.second_partials(to_base(xp));
            MetricHessian r(n, make_rank3(n));
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    Mat s = Mat::Zero(n, n);
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d) s += jac(c, a) * jac(d, b) * dd[c][d];
                    r[a][b] = jac.transpose() * s * jac;
                }
            return r;
        };
    }
    return out;
}

} // namespace gaugeqm
