#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "gaugeqm/geometry.hpp"

namespace gaugeqm {

enum class Boundary { unset, periodic, dirichlet };

/// One grid direction. Periodic axes hold n nodes over [lo, lo + n h); the
/// node at lo + n h is identified with lo. Dirichlet axes hold n nodes on
/// [lo, lo + (n-1) h] and the end nodes carry fixed boundary data.
struct GridAxis {
    int n = 0;
    double lo = 0.0;
    double h = 0.0;
    Boundary boundary = Boundary::unset;

    static GridAxis periodic(double lo, double length, int n) {
        require(n >= 3 && length > 0, ErrorKind::invalid_argument,
                "periodic axis needs n >= 3 and positive length");
        return {n, lo, length / n, Boundary::periodic};
    }
    static GridAxis dirichlet(double lo, double hi, int n) {
        require(n >= 3 && hi > lo, ErrorKind::invalid_argument,
                "dirichlet axis needs n >= 3 and hi > lo");
        return {n, lo, (hi - lo) / (n - 1), Boundary::dirichlet};
    }

    double coord(int k) const { return lo + k * h; }
};

/// Complex field on a regular grid over a chart (up to three axes), stored
/// with axis 0 varying fastest.
class WaveField {
public:
    WaveField(ChartMetric metric, std::vector<GridAxis> axes)
        : metric_(std::move(metric)), axes_(std::move(axes)) {
        require(!axes_.empty() && axes_.size() <= 3, ErrorKind::invalid_argument,
                "grids support one to three axes");
        require(static_cast<int>(axes_.size()) == metric_.dim, ErrorKind::invalid_argument,
                "grid and chart dimensions differ");
        std::size_t total = 1;
        for (const GridAxis& a : axes_) {
            require(a.n >= 3 && a.h > 0, ErrorKind::invalid_argument,
                    "every axis needs n >= 3 and positive spacing");
            strides_.push_back(total);
            total *= static_cast<std::size_t>(a.n);
        }
        values = CVec::Zero(static_cast<Eigen::Index>(total));
    }

    static WaveField ring(ChartMetric metric, double lo, double length, int n) {
        return WaveField(std::move(metric), {GridAxis::periodic(lo, length, n)});
    }

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
    const GridAxis& axis(int a) const { return axes_[a]; }
    const std::vector<GridAxis>& axes() const { return axes_; }
    const ChartMetric& metric() const { return metric_; }
    std::size_t stride(int a) const { return strides_[a]; }

    int coordinate_index(std::size_t flat, int a) const {
        return static_cast<int>((flat / strides_[a]) % static_cast<std::size_t>(axes_[a].n));
    }

    Point point(std::size_t flat) const {
        Point x(dim());
        for (int a = 0; a < dim(); ++a) x(a) = axes_[a].coord(coordinate_index(flat, a));
        return x;
    }

    /// Flat index of the neighbour `offset` steps along axis a, or -1 when it
    /// falls off a Dirichlet edge.
    long neighbour(std::size_t flat, int a, int offset) const {
        const int n = axes_[a].n;
        int k = coordinate_index(flat, a) + offset;
        if (axes_[a].boundary == Boundary::periodic) {
            k = ((k % n) + n) % n;
        } else if (k < 0 || k >= n) {
            return -1;
        }
        const long base = static_cast<long>(flat) -
                          static_cast<long>(coordinate_index(flat, a) * strides_[a]);
        return base + static_cast<long>(k * strides_[a]);
    }

    bool is_boundary(std::size_t flat) const {
        for (int a = 0; a < dim(); ++a) {
            if (axes_[a].boundary != Boundary::dirichlet) continue;
            const int k = coordinate_index(flat, a);
            if (k == 0 || k == axes_[a].n - 1) return true;
        }
        return false;
    }

    bool boundary_set() const {
        for (const GridAxis& a : axes_)
            if (a.boundary == Boundary::unset) return false;
        return true;
    }

    void set_boundary(Boundary b) {
        for (GridAxis& a : axes_) a.boundary = b;
    }

    double cell_volume() const {
        double v = 1.0;
        for (const GridAxis& a : axes_) v *= a.h;
        return v;
    }

    void fill(const std::function<cplx(const Point&)>& f) {
        for (std::size_t i = 0; i < size(); ++i) values(static_cast<Eigen::Index>(i)) = f(point(i));
    }

    WaveField with_values(CVec v) const {
        require(static_cast<std::size_t>(v.size()) == size(), ErrorKind::invalid_argument,
                "value count does not match the grid");
        WaveField w = *this;
        w.values = std::move(v);
        return w;
    }

    /// sqrt|det g| at every node.
    Vec measure() const {
        Vec w(static_cast<Eigen::Index>(size()));
        for (std::size_t i = 0; i < size(); ++i)
            w(static_cast<Eigen::Index>(i)) = invariant_measure(metric_, point(i));
        return w;
    }

    /// sum sqrt(g) |psi|^2 dV over the nodes.
    double norm_squared() const {
        return (measure().array() * values.array().abs2()).sum() * cell_volume();
    }

    CVec values;

private:
    ChartMetric metric_;
    std::vector<GridAxis> axes_;
    std::vector<std::size_t> strides_;
};

/// Born density sqrt(g) |psi|^2 at every node.
inline Vec born_density(const WaveField& f) { return f.measure().array() * f.values.array().abs2(); }

/// Multiplies every node by a unimodular factor exp(-i sigma(x)).
inline WaveField apply_gauge(const WaveField& f, const std::function<double(const Point&)>& sigma) {
    WaveField out = f;
    for (std::size_t i = 0; i < f.size(); ++i)
        out.values(static_cast<Eigen::Index>(i)) *= std::polar(1.0, -sigma(f.point(i)));
    return out;
}

/// CSV "x1,..,xN,re,im", one node per row.
inline void write_field_csv(std::ostream& os, const WaveField& f) {
    for (int a = 0; a < f.dim(); ++a) os << "x" << (a + 1) << ",";
    os << "re,im\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Point x = f.point(i);
        for (int a = 0; a < f.dim(); ++a) os << x(a) << ",";
        const cplx v = f.values(static_cast<Eigen::Index>(i));
        os << v.real() << "," << v.imag() << "\n";
    }
}

using SparseReal = Eigen::SparseMatrix<double>;
using SparseComplex = Eigen::SparseMatrix<cplx>;

namespace detail {

inline void add_outer(std::vector<Eigen::Triplet<double>>& t, const std::vector<long>& idx,
                      const std::vector<double>& bl, const std::vector<double>& br, double w) {
    for (std::size_t p = 0; p < idx.size(); ++p)
        for (std::size_t q = 0; q < idx.size(); ++q)
            if (bl[p] != 0 && br[q] != 0) t.emplace_back(idx[p], idx[q], w * bl[p] * br[q]);
}

} // namespace detail

/// Symmetric matrix A of the discrete Dirichlet energy
///   sum sqrt(g) g^{mu nu} conj(D_mu psi) D_nu psi  (per unit cell volume),
/// with diagonal terms on grid edges and mixed terms on plaquettes, the
/// coefficients sampled at edge and plaquette centres. The flux-form
/// Laplace-Beltrami operator is then -A psi / sqrt(g), self-adjoint
/// under the sqrt(g)-weighted inner product.
inline SparseReal energy_matrix(const WaveField& f) {
    require(f.boundary_set(), ErrorKind::missing_boundary,
            "grid boundary flag is unset on at least one axis");
    const int n = f.dim();
    const auto size = static_cast<Eigen::Index>(f.size());
    std::vector<Eigen::Triplet<double>> trip;
    auto coeffs = [&](const Point& p) {
        const Mat g = metric_at(f.metric(), p);
        const double det = g.determinant();
        require(std::abs(det) >= 1e-14, ErrorKind::degenerate_metric,
                "metric determinant vanishes inside the grid");
        return Mat(std::sqrt(std::abs(det)) * g.inverse());
    };
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Point xi = f.point(i);
        for (int mu = 0; mu < n; ++mu) {
            const long j = f.neighbour(i, mu, 1);
            if (j < 0) continue;
            const double hm = f.axis(mu).h;
            const Mat a = coeffs(xi + 0.5 * hm * unit(n, mu));
            const double w = a(mu, mu) / (hm * hm);
            detail::add_outer(trip, {static_cast<long>(i), j}, {1, -1}, {1, -1}, w);
        }
        for (int mu = 0; mu < n; ++mu)
            for (int nu = mu + 1; nu < n; ++nu) {
                const long c10 = f.neighbour(i, mu, 1);
                const long c01 = f.neighbour(i, nu, 1);
                if (c10 < 0 || c01 < 0) continue;
                const long c11 = f.neighbour(static_cast<std::size_t>(c10), nu, 1);
                const double hm = f.axis(mu).h, hn = f.axis(nu).h;
                const Mat a = coeffs(xi + 0.5 * hm * unit(n, mu) + 0.5 * hn * unit(n, nu));
                const double w = a(mu, nu) / (4 * hm * hn);
                if (w == 0) continue;
                // corners c00, c10, c01, c11
                const std::vector<long> idx{static_cast<long>(i), c10, c01, c11};
                const std::vector<double> bm{-1, 1, -1, 1};
                const std::vector<double> bn{-1, -1, 1, 1};
                detail::add_outer(trip, idx, bm, bn, w);
                detail::add_outer(trip, idx, bn, bm, w);
            }
    }
    SparseReal A(size, size);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

/// Flux-form (1/sqrt g) d_mu (sqrt g g^{mu nu} d_nu psi); zero on Dirichlet
/// boundary nodes.
inline CVec laplace_beltrami(const WaveField& f) {
    const SparseReal A = energy_matrix(f);
    const Vec w = f.measure();
    CVec out = -(A * f.values);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out(k) = f.is_boundary(i) ? cplx{0.0, 0.0} : out(k) / w(k);
    }
    return out;
}

/// Covariant form g^{mu nu} (d_mu d_nu psi - Gamma^l_{mu nu} d_l psi) with
/// central differences at the nodes; zero on Dirichlet boundary nodes.
inline CVec laplace_beltrami_covariant(const WaveField& f) {
    require(f.boundary_set(), ErrorKind::missing_boundary,
            "grid boundary flag is unset on at least one axis");
    const int n = f.dim();
    CVec out = CVec::Zero(static_cast<Eigen::Index>(f.size()));
    auto val = [&](long k) { return f.values(static_cast<Eigen::Index>(k)); };
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.is_boundary(i)) continue;
        const GeometryJet jet = metric_jet(f.metric(), f.point(i));
        CVec d1(n);
        CMat d2(n, n);
        for (int mu = 0; mu < n; ++mu) {
            const double h = f.axis(mu).h;
            const long p = f.neighbour(i, mu, 1), m = f.neighbour(i, mu, -1);
            d1(mu) = (val(p) - val(m)) / (2 * h);
            d2(mu, mu) = (val(p) - 2.0 * val(static_cast<long>(i)) + val(m)) / (h * h);
            for (int nu = mu + 1; nu < n; ++nu) {
                const double k = f.axis(nu).h;
                const auto pp = f.neighbour(static_cast<std::size_t>(p), nu, 1);
                const auto pm = f.neighbour(static_cast<std::size_t>(p), nu, -1);
                const auto mp = f.neighbour(static_cast<std::size_t>(m), nu, 1);
                const auto mm = f.neighbour(static_cast<std::size_t>(m), nu, -1);
                d2(mu, nu) = d2(nu, mu) = (val(pp) - val(pm) - val(mp) + val(mm)) / (4 * h * k);
            }
        }
        cplx s{0.0, 0.0};
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) {
                cplx term = d2(mu, nu);
                for (int l = 0; l < n; ++l) term -= jet.gamma_second[l](mu, nu) * d1(l);
                s += jet.g_inv(mu, nu) * term;
            }
        out(static_cast<Eigen::Index>(i)) = s;
    }
    return out;
}

/// Curvature scalar at every node.
inline Vec ricci_on_grid(const WaveField& f) {
    Vec r(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i)
        r(static_cast<Eigen::Index>(i)) = metric_jet(f.metric(), f.point(i)).ricci_scalar;
    return r;
}

/// Axes along which the metric changes by more than `limit` (relative) over
/// one cell somewhere on the grid.
inline std::vector<std::string> resolution_warnings(const WaveField& f, double limit = 0.05) {
    std::vector<std::string> out;
    for (int a = 0; a < f.dim(); ++a) {
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const long j = f.neighbour(i, a, 1);
            if (j < 0) continue;
            const Point x = f.point(i);
            const Mat g0 = metric_at(f.metric(), x);
            const Mat g1 = metric_at(f.metric(), x + f.axis(a).h * unit(f.dim(), a));
            worst = std::max(worst, (g1 - g0).norm() / std::max(g0.norm(), 1e-300));
        }
        if (worst > limit)
            out.push_back("metric changes by " + std::to_string(100 * worst) +
                          "% per cell along axis " + std::to_string(a + 1));
    }
    return out;
}

} // namespace gaugeqm
