#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "gaugeqm/fitting.hpp"
#include "gaugeqm/geometry.hpp"
#include "gaugeqm/wavefield.hpp"

namespace gaugeqm {

// ---------------------------------------------------------------------------
// Short-time expansion of Hamilton's principal function
// ---------------------------------------------------------------------------

/// Which reading of the expansion coefficients to use. The default solves
/// the Hamilton-Jacobi equation through fourth order in xi; the others are
/// kept to compare residual orders.
struct ExpansionVariant {
    double cubic_sign = -1.0;
    QuarticForm quartic = QuarticForm::selected;

    static ExpansionVariant selected() { return {}; }
    static ExpansionVariant printed() { return {1.0, QuarticForm::printed}; }
};

/// S(xi, eps) = (m / 2 eps) F(xi) + m eps / 2 about the endpoint x, with
/// xi = x - y and F = g xi xi + c Gamma xi xi xi + A xi xi xi xi.
struct HJExpansion {
    ChartMetric metric;
    GeometryJet jet;
    double m = 1.0;
    ExpansionVariant variant;
    Rank4 quartic;

    HJExpansion(ChartMetric metric_, const Point& x, double mass,
                ExpansionVariant v = ExpansionVariant::selected())
        : metric(std::move(metric_)), jet(metric_jet(metric, x)), m(mass), variant(v) {
        require(mass > 0, ErrorKind::invalid_argument, "mass must be positive");
        quartic = v.quartic == QuarticForm::selected ? jet.a_tensor
                                                     : quartic_coefficients(jet, v.quartic);
    }

    double polynomial(const Vec& xi) const {
        const int n = jet.dim();
        double f = xi.dot(jet.g * xi);
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) {
                const double q = xi(mu) * xi(nu);
                double c = 0.0;
                for (int l = 0; l < n; ++l) {
                    c += jet.gamma(mu, nu, l) * xi(l);
                    for (int e = 0; e < n; ++e) f += quartic(mu, nu, l, e) * q * xi(l) * xi(e);
                }
                f += variant.cubic_sign * c * q;
            }
        return f;
    }
};

inline double hj_action(const HJExpansion& e, const Vec& xi, double eps) {
    require(eps > 0, ErrorKind::invalid_argument, "eps must be positive");
    return 0.5 * e.m / eps * e.polynomial(xi) + 0.5 * e.m * eps;
}

/// |dS/deps + (1/2m) g^{mu nu}(x - xi) dS/dxi^mu dS/dxi^nu - m/2|, with the
/// xi-gradient from a five-point central stencil (exact on quartics).
inline double hj_residual(const HJExpansion& e, const Vec& xi, double eps) {
    require(eps > 0, ErrorKind::invalid_argument, "eps must be positive");
    const int n = e.jet.dim();
    const double h = 1e-2 * std::max(xi.cwiseAbs().maxCoeff(), 1e-6);
    Vec grad(n);
    for (int mu = 0; mu < n; ++mu) {
        const Vec d = h * unit(n, mu);
        grad(mu) = (-e.polynomial(xi + 2 * d) + 8 * e.polynomial(xi + d) -
                    8 * e.polynomial(xi - d) + e.polynomial(xi - 2 * d)) /
                   (12 * h);
    }
    const Mat g_inv = metric_at(e.metric, e.jet.point - xi).inverse();
    // dS/deps = -(m/2eps^2) F + m/2 and dS/dxi = (m/2eps) dF, so the m/2 cancels
    return 0.5 * e.m / (eps * eps) * std::abs(0.25 * grad.dot(g_inv * grad) - e.polynomial(xi));
}

// ---------------------------------------------------------------------------
// Damped Gaussian moments
// ---------------------------------------------------------------------------

struct MomentSet {
    cplx Q;
    CVec Q_vec;
    CMat Q_mat;
    double eta = 0.0;
    cplx v;
};

namespace detail {

inline void require_positive_definite(const Mat& g) {
    require(g.rows() == g.cols() && g.rows() >= 1, ErrorKind::invalid_argument,
            "metric sample must be square");
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    require(es.eigenvalues().minCoeff() > 0, ErrorKind::unsupported_signature,
            "moments are defined for positive-definite metrics only");
}

} // namespace detail

/// v fixing Q = 1 for the weight exp[(i m - eta) g zeta zeta].
inline cplx moment_normalization(const Mat& g, double m, double eta) {
    detail::require_positive_definite(g);
    const auto n = static_cast<double>(g.rows());
    return std::pow(std::sqrt(cplx(eta, -m)), n) * std::sqrt(g.determinant()) /
           std::pow(pi, 0.5 * n);
}

inline MomentSet moments_closed_form(const Mat& g, double m, double eta) {
    require(m > 0, ErrorKind::invalid_argument, "mass must be positive");
    require(eta >= 0, ErrorKind::invalid_argument, "eta must be >= 0");
    MomentSet s;
    s.v = moment_normalization(g, m, eta);
    s.eta = eta;
    s.Q = 1.0;
    s.Q_vec = CVec::Zero(g.rows());
    s.Q_mat = g.inverse().cast<cplx>() / (2.0 * cplx(eta, -m));
    return s;
}

/// Smallest radius with exp(-eta lambda_min R^2)(1 + R^2) below `tail`.
inline double moments_radius(const Mat& g, double eta, double tail = 1e-10) {
    detail::require_positive_definite(g);
    require(eta > 0, ErrorKind::invalid_argument, "eta must be positive");
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const double lam = es.eigenvalues().minCoeff();
    double r = std::sqrt(-std::log(tail) / (eta * lam));
    while (std::exp(-eta * lam * r * r) * (1 + r * r) >= tail) r *= 1.05;
    return r;
}

/// Tensor-product trapezoid quadrature of the damped moment integrals over
/// the cube |u_i| <= radius in the eigenframe of g (the integrand factorizes
/// there), with the closed-form v.
inline MomentSet moments_quadrature(const Mat& g, double m, double eta, double radius,
                                    long points) {
    detail::require_positive_definite(g);
    const int n = static_cast<int>(g.rows());
    require(n <= 2, ErrorKind::invalid_argument, "quadrature moments support N <= 2");
    require(m > 0 && eta > 0, ErrorKind::invalid_argument, "need m > 0 and eta > 0");
    require(radius > 0 && points >= 3, ErrorKind::invalid_argument,
            "need a positive radius and at least 3 points");
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec lam = es.eigenvalues();
    const Mat U = es.eigenvectors();
    require(std::exp(-eta * lam.minCoeff() * radius * radius) * (1 + radius * radius) < 1e-10,
            ErrorKind::insufficient_domain,
            "integration radius leaves a damped tail above 1e-10 of the integrand scale");

    const cplx c(-eta, m);
    const double h = 2 * radius / static_cast<double>(points - 1);
    std::vector<cplx> I0(n), I1(n), I2(n);
    for (int a = 0; a < n; ++a) {
        cplx s0 = 0, s1 = 0, s2 = 0;
        for (long k = 0; k < points; ++k) {
            const double u = -radius + h * static_cast<double>(k);
            const double w = (k == 0 || k == points - 1) ? 0.5 * h : h;
            const cplx e = w * std::exp(c * lam(a) * u * u);
            s0 += e;
            s1 += e * u;
            s2 += e * u * u;
        }
        I0[a] = s0;
        I1[a] = s1;
        I2[a] = s2;
    }
    MomentSet s;
    s.eta = eta;
    s.v = moment_normalization(g, m, eta);
    cplx prod = 1;
    for (int a = 0; a < n; ++a) prod *= I0[a];
    s.Q = s.v * prod;
    CVec qu(n);
    CMat qm(n, n);
    for (int a = 0; a < n; ++a) {
        qu(a) = s.v * prod / I0[a] * I1[a];
        for (int b = 0; b < n; ++b)
            qm(a, b) = a == b ? s.v * prod / I0[a] * I2[a]
                              : s.v * prod / (I0[a] * I0[b]) * I1[a] * I1[b];
    }
    const CMat Uc = U.cast<cplx>();
    s.Q_vec = Uc * qu;
    s.Q_mat = Uc * qm * Uc.transpose();
    return s;
}

/// Quadrature with radius from the tail bound and a step resolving the
/// oscillation at the edge of the domain.
inline MomentSet moments_quadrature_auto(const Mat& g, double m, double eta) {
    const double r = moments_radius(g, eta, 1e-11);
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const double freq = 2 * m * es.eigenvalues().maxCoeff() * r;
    const auto points = static_cast<long>(std::ceil(2 * r * freq / 1.0)) + 1;
    return moments_quadrature(g, m, eta, r, std::max<long>(points, 1001));
}

/// Polynomial extrapolation of the quadrature moments to eta -> 0.
inline MomentSet moments_extrapolated(const Mat& g, double m, const std::vector<double>& etas) {
    require(!etas.empty(), ErrorKind::invalid_argument, "eta schedule is empty");
    std::vector<cplx> q;
    std::vector<CVec> qv;
    std::vector<CMat> qm;
    for (double e : etas) {
        const MomentSet s = moments_quadrature_auto(g, m, e);
        q.push_back(s.Q);
        qv.push_back(s.Q_vec);
        qm.push_back(s.Q_mat);
    }
    MomentSet out;
    out.eta = 0.0;
    out.v = moment_normalization(g, m, 0.0);
    out.Q = neville(etas, q);
    out.Q_vec = neville(etas, qv);
    out.Q_mat = neville(etas, qm);
    return out;
}

// ---------------------------------------------------------------------------
// Schrodinger-type and Klein-Gordon operators on a grid
// ---------------------------------------------------------------------------

/// -(1/2m)[LB psi + m^2 psi - (R/3) psi], the right side of i dpsi/dtau.
inline WaveField schrodinger_rhs(const WaveField& f, double m) {
    require(m > 0, ErrorKind::invalid_argument, "mass must be positive");
    const CVec lb = laplace_beltrami(f);
    const Vec r = ricci_on_grid(f);
    CVec out(lb.size());
    for (Eigen::Index i = 0; i < lb.size(); ++i)
        out(i) = f.is_boundary(static_cast<std::size_t>(i))
                     ? cplx{0.0, 0.0}
                     : -0.5 / m * (lb(i) + (m * m - r(i) / 3.0) * f.values(i));
    return f.with_values(std::move(out));
}

/// Matrix of psi -> schrodinger_rhs(psi); Dirichlet rows are zero.
inline SparseReal schrodinger_matrix(const WaveField& f, double m) {
    const SparseReal A = energy_matrix(f);
    const Vec w = f.measure();
    const Vec r = ricci_on_grid(f);
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseReal::InnerIterator it(A, k); it; ++it)
            if (!f.is_boundary(static_cast<std::size_t>(it.row())))
                trip.emplace_back(it.row(), it.col(), 0.5 / m * it.value() / w(it.row()));
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!f.is_boundary(i)) {
            const auto k = static_cast<Eigen::Index>(i);
            trip.emplace_back(k, k, -0.5 / m * (m * m - r(k) / 3.0));
        }
    SparseReal H(A.rows(), A.cols());
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

/// Implicit midpoint steps of i dpsi/dtau = H psi:
/// (1 + i dt H / 2) psi_{k+1} = (1 - i dt H / 2) psi_k.
inline WaveField evolve_tau(const WaveField& f, double m, double dtau, int steps) {
    require(dtau > 0 && steps >= 0, ErrorKind::invalid_argument,
            "need dtau > 0 and a non-negative step count");
    const SparseComplex H = schrodinger_matrix(f, m).cast<cplx>();
    SparseComplex I(H.rows(), H.cols());
    I.setIdentity();
    const cplx half(0.0, 0.5 * dtau);
    SparseComplex lhs = I + half * H;
    const SparseComplex rhs = I - half * H;
    lhs.makeCompressed();
    Eigen::SparseLU<SparseComplex> lu;
    lu.compute(lhs);
    if (lu.info() != Eigen::Success)
        throw ConvergenceError("implicit midpoint factorization failed", 0.0);
    CVec psi = f.values;
    for (int s = 0; s < steps; ++s) {
        CVec next = lu.solve(rhs * psi);
        if (lu.info() != Eigen::Success || !next.allFinite())
            throw ConvergenceError("implicit midpoint solve failed at step " + std::to_string(s),
                                   (lhs * next - rhs * psi).norm());
        psi = std::move(next);
    }
    return f.with_values(std::move(psi));
}

/// max |LB psi + m^2 psi - (R/3) psi| over non-boundary nodes.
inline double kg_residual(const WaveField& f, double m) {
    const CVec lb = laplace_beltrami(f);
    const Vec r = ricci_on_grid(f);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < lb.size(); ++i) {
        if (f.is_boundary(static_cast<std::size_t>(i))) continue;
        worst = std::max(worst, std::abs(lb(i) + (m * m - r(i) / 3.0) * f.values(i)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// One short-time kernel step in one dimension
// ---------------------------------------------------------------------------

/// The xi integral is cut off smoothly by 0.5 erfc((|xi| - center) / width),
/// which must vanish well inside half the ring. The quadrature runs on a
/// grid `refine` times finer than the field grid; psi' is carried there by
/// trigonometric interpolation.
struct KernelOptions {
    double window_center = 1.2;
    double window_width = 0.24;
    std::optional<int> refine; ///< default: enough to resolve the kernel's oscillation
    double max_phase_step = 0.5; ///< radians of kernel phase per quadrature step
};

namespace detail {

/// Values of a periodic sample set at `factor` times the density.
inline CVec trig_upsample(const CVec& v, int factor) {
    const auto n = v.size();
    const Eigen::Index fine = n * factor;
    CVec coef(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        cplx s = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            s += v(j) * std::polar(1.0, -two_pi * static_cast<double>(k * j % n) / n);
        coef(k) = s / static_cast<double>(n);
    }
    CVec out = CVec::Zero(fine);
    for (Eigen::Index k = 0; k < n; ++k) {
        // signed wavenumber; the Nyquist term is split evenly for even n
        const Eigen::Index kk = k <= n / 2 ? k : k - n;
        const bool nyquist = n % 2 == 0 && k == n / 2;
        for (Eigen::Index j = 0; j < fine; ++j) {
            const double arg = two_pi * static_cast<double>(kk) * static_cast<double>(j) /
                               static_cast<double>(fine);
            out(j) += nyquist ? coef(k) * std::cos(arg) : coef(k) * std::polar(1.0, arg);
        }
    }
    return out;
}

} // namespace detail

/// psi(x, tau + eps) from psi'(x, tau + eps) = int dxi v' exp[i S(xi, eps)
/// - eta g xi^2 / (2 eps)] psi'(x - xi, tau) with psi' = sqrt(g) psi and
/// v' = v / sqrt(2 eps) the normalization in xi. Returns the unprimed field.
inline WaveField kernel_step(const WaveField& f, double m, double eps, double eta,
                             const KernelOptions& opt = {}) {
    require(f.dim() == 1 && f.axis(0).boundary == Boundary::periodic,
            ErrorKind::invalid_argument, "kernel_step runs on a periodic one-dimensional grid");
    require(m > 0 && eps > 0 && eta > 0, ErrorKind::invalid_argument,
            "need m > 0, eps > 0 and eta > 0");
    const GridAxis& ax = f.axis(0);
    const double length = ax.h * ax.n;
    const double reach = opt.window_center + 6 * opt.window_width;
    require(reach < 0.5 * length, ErrorKind::resolution,
            "kernel window reaches past half the ring");

    const Vec w = f.measure();
    double g_max = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) g_max = std::max(g_max, w(i) * w(i));
    // kernel phase m g xi^2 / (2 eps) changes by about m g xi h / eps per step
    const double freq = 1.25 * m * g_max * reach / eps;
    const int refine =
        opt.refine.value_or(std::max(1, static_cast<int>(std::ceil(freq * ax.h / opt.max_phase_step))));
    require(refine >= 1, ErrorKind::resolution, "quadrature step exceeds the grid step");
    const double hq = ax.h / refine;
    require(freq * hq <= 2 * opt.max_phase_step, ErrorKind::resolution,
            "quadrature step under-resolves the kernel oscillation");

    const CVec primed = (w.cast<cplx>().array() * f.values.array()).matrix();
    const CVec fine = detail::trig_upsample(primed, refine);
    const auto n_fine = fine.size();
    const int q_max = static_cast<int>(std::ceil(reach / hq));

    std::vector<double> window(2 * q_max + 1);
    for (int q = -q_max; q <= q_max; ++q)
        window[q + q_max] =
            0.5 * std::erfc((std::abs(q * hq) - opt.window_center) / opt.window_width);

    CVec out(f.values.size());
    for (int j = 0; j < ax.n; ++j) {
        const Point x = f.point(static_cast<std::size_t>(j));
        const HJExpansion e(f.metric(), x, m);
        const double g = e.jet.g(0, 0);
        const cplx v = moment_normalization(e.jet.g, m, eta) / std::sqrt(2 * eps);
        cplx s = 0;
        for (int q = -q_max; q <= q_max; ++q) {
            const double xi = q * hq;
            const Vec xv = Vec::Constant(1, xi);
            const double phase = hj_action(e, xv, eps);
            const double damp = -eta * g * xi * xi / (2 * eps);
            Eigen::Index idx = (static_cast<Eigen::Index>(j) * refine - q) % n_fine;
            if (idx < 0) idx += n_fine;
            s += window[q + q_max] * std::exp(cplx(damp, phase)) * fine(idx);
        }
        out(j) = v * hq * s / w(j);
    }
    return f.with_values(std::move(out));
}

/// max |(psi(tau + eps) - psi(tau)) / eps + i schrodinger_rhs(psi)| divided
/// by max |schrodinger_rhs(psi)|.
inline double kernel_consistency(const WaveField& f, double m, double eps, double eta,
                                 const KernelOptions& opt = {}) {
    const WaveField next = kernel_step(f, m, eps, eta, opt);
    const WaveField rhs = schrodinger_rhs(f, m);
    const CVec target = cplx(0.0, -1.0) * rhs.values;
    const CVec diff = (next.values - f.values) / eps - target;
    return diff.cwiseAbs().maxCoeff() / target.cwiseAbs().maxCoeff();
}

} // namespace gaugeqm
