#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "gaugeqm/error.hpp"
#include "gaugeqm/geometry.hpp"
#include "gaugeqm/path.hpp"
#include "gaugeqm/potential.hpp"

namespace gaugeqm {

/// L = (m/2)(g_{mu nu} xdot^mu xdot^nu + 1), optionally plus the coupling
/// e phi_mu xdot^mu. The homogeneous m sqrt(xdot.xdot) form is never used:
/// it is reparameterization invariant and its discrete Hessian is singular.
struct LagrangianSpec {
    enum class Kind { inhomogeneous_massive, charged };

    Kind kind = Kind::inhomogeneous_massive;
    ChartMetric metric;
    double mass = 1.0;
    double charge = 0.0;
    std::optional<GaugePotential> potential;

    static LagrangianSpec massive(ChartMetric metric, double m) {
        require(m > 0, ErrorKind::invalid_argument, "mass must be positive");
        LagrangianSpec l;
        l.metric = std::move(metric);
        l.mass = m;
        return l;
    }

    static LagrangianSpec charged(ChartMetric metric, double m, double e, GaugePotential phi) {
        require(m > 0, ErrorKind::invalid_argument, "mass must be positive");
        require(phi.dim == metric.dim, ErrorKind::invalid_argument,
                "potential and metric dimensions differ");
        LagrangianSpec l;
        l.kind = Kind::charged;
        l.metric = std::move(metric);
        l.mass = m;
        l.charge = e;
        l.potential = std::move(phi);
        return l;
    }

    bool has_coupling() const { return kind == Kind::charged && potential && charge != 0.0; }
};

namespace detail {

inline void check_path_for_action(const Path& path, const LagrangianSpec& lag) {
    require(path.dim() == lag.metric.dim, ErrorKind::invalid_path,
            "path dimension does not match the chart");
    if (lag.metric.in_domain)
        for (std::size_t i = 0; i < path.size(); ++i)
            require(lag.metric.in_domain(path.node(i)), ErrorKind::invalid_path,
                    "node " + std::to_string(i) + " lies outside the chart");
    if (lag.kind == LagrangianSpec::Kind::charged && lag.potential)
        check_path_for(path, *lag.potential);
}

inline double kinetic_segment(const LagrangianSpec& lag, const Point& a, const Point& b,
                              double dtau) {
    const Vec d = b - a;
    const Mat g = lag.metric.components(0.5 * (a + b));
    return 0.5 * lag.mass * (d.dot(g * d) / dtau + dtau);
}

inline double segment_action(const LagrangianSpec& lag, const Point& a, const Point& b,
                             double dtau) {
    double s = kinetic_segment(lag, a, b, dtau);
    if (lag.has_coupling()) s += lag.charge * segment_line_integral(*lag.potential, a, b);
    return s;
}

/// Gradient of one segment's action with respect to its two end nodes.
inline void segment_gradient(const LagrangianSpec& lag, const Point& a, const Point& b,
                             double dtau, Vec& ga, Vec& gb) {
    const int n = lag.metric.dim;
    const Point c = 0.5 * (a + b);
    const Vec d = b - a;
    const Mat g = lag.metric.components(c);
    const Rank3 dg = metric_first_partials(lag.metric, c);
    Vec half_dg(n);
    for (int al = 0; al < n; ++al) half_dg(al) = 0.5 * d.dot(dg[al] * d);
    const Vec gd = 2.0 * (g * d);
    const double k = 0.5 * lag.mass / dtau;
    ga = k * (half_dg - gd);
    gb = k * (half_dg + gd);
    if (!lag.has_coupling()) return;
    const GaugePotential& phi = *lag.potential;
    const double e = lag.charge;
    if (phi.segment_integral) {
        // Presets carrying a primitive are closed forms: d/db int_a^b phi = phi(b).
        ga -= e * phi.components(a);
        gb += e * phi.components(b);
        return;
    }
    const Vec pc = phi.components(c);
    const double h = 1e-5;
    Vec jt_d(n);
    for (int al = 0; al < n; ++al) {
        const Vec step = h * unit(n, al);
        jt_d(al) = (phi.components(c + step) - phi.components(c - step)).dot(d) / (2 * h);
    }
    ga += e * (0.5 * jt_d - pc);
    gb += e * (0.5 * jt_d + pc);
}

} // namespace detail

/// Midpoint-rule discrete action sum_i L(x_{i+1/2}, dx_i/dtau_i) dtau_i.
/// Negative increments (inverted paths) flip the sign of every term.
inline double action(const Path& path, const LagrangianSpec& lag) {
    detail::check_path_for_action(path, lag);
    double s = 0.0;
    for (int i = 0; i < path.segments(); ++i)
        s += detail::segment_action(lag, path.node(i), path.node(i + 1), path.increment(i));
    return s;
}

/// Partial sums S_0 = 0, S_k = action of the first k segments.
inline std::vector<double> running_action(const Path& path, const LagrangianSpec& lag) {
    detail::check_path_for_action(path, lag);
    std::vector<double> run(path.size(), 0.0);
    for (int i = 0; i < path.segments(); ++i)
        run[i + 1] = run[i] + detail::segment_action(lag, path.node(i), path.node(i + 1),
                                                     path.increment(i));
    return run;
}

/// Gradient of the discrete action with respect to the interior nodes,
/// stacked node-major; this is the discrete Euler-Lagrange residual.
inline Vec euler_lagrange_residual(const Path& path, const LagrangianSpec& lag) {
    detail::check_path_for_action(path, lag);
    const int n = path.dim();
    const int interior = static_cast<int>(path.size()) - 2;
    Vec r = Vec::Zero(static_cast<Eigen::Index>(interior) * n);
    Vec ga, gb;
    for (int i = 0; i < path.segments(); ++i) {
        detail::segment_gradient(lag, path.node(i), path.node(i + 1), path.increment(i), ga, gb);
        if (i >= 1) r.segment((i - 1) * n, n) += ga;
        if (i + 1 <= interior) r.segment(i * n, n) += gb;
    }
    return r;
}

struct ExtremalOptions {
    double tolerance = 1e-10; ///< max-norm of the Euler-Lagrange residual
    int max_iterations = 200;
    double hessian_step = 1e-7;
};

struct ExtremalResult {
    Path path;
    double residual = 0.0;
    int iterations = 0;
};

namespace detail {

/// Block-tridiagonal Hessian by central differences of the segment gradients.
inline Mat euler_lagrange_jacobian(const Path& path, const LagrangianSpec& lag, double step) {
    const int n = path.dim();
    const int interior = static_cast<int>(path.size()) - 2;
    const int dofs = interior * n;
    Mat h = Mat::Zero(dofs, dofs);
    std::vector<Point> nodes = path.nodes();
    Vec ga, gb;
    auto local = [&](int k) {
        // Residual contributions at nodes k-1, k, k+1 from segments k-1 and k.
        Vec out = Vec::Zero(3 * n);
        for (int seg : {k - 1, k}) {
            segment_gradient(lag, nodes[seg], nodes[seg + 1], path.increment(seg), ga, gb);
            out.segment((seg - (k - 1)) * n, n) += ga;
            out.segment((seg + 1 - (k - 1)) * n, n) += gb;
        }
        return out;
    };
    for (int k = 1; k <= interior; ++k)
        for (int al = 0; al < n; ++al) {
            const double hstep = step * std::max(1.0, std::abs(nodes[k](al)));
            const double orig = nodes[k](al);
            nodes[k](al) = orig + hstep;
            const Vec plus = local(k);
            nodes[k](al) = orig - hstep;
            const Vec minus = local(k);
            nodes[k](al) = orig;
            const Vec col = (plus - minus) / (2 * hstep);
            const int c = (k - 1) * n + al;
            for (int j = 0; j < 3; ++j) {
                const int node = k - 1 + j;
                if (node < 1 || node > interior) continue;
                h.block((node - 1) * n, c, n, 1) = col.segment(j * n, n);
            }
        }
    return 0.5 * (h + h.transpose());
}

inline Path apply_step(const Path& path, const Vec& dx, double t) {
    const int n = path.dim();
    std::vector<Point> interior;
    for (std::size_t k = 1; k + 1 < path.size(); ++k)
        interior.push_back(path.node(k) + t * dx.segment((k - 1) * n, n));
    return path.with_interior(interior);
}

/// Residual norm at a trial path, or +inf when the trial leaves the domain.
inline double trial_norm(const Path& p, const LagrangianSpec& lag) {
    try {
        return euler_lagrange_residual(p, lag).norm();
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace detail

/// Stationary discrete path between fixed endpoints by damped Newton
/// iteration on the Euler-Lagrange system; falls back to backtracking
/// descent on |r|^2 when the Newton step stops reducing the residual.
/// Stationarity, not minimality, is the target (saddles are fine).
inline ExtremalResult find_extremal_detailed(const LagrangianSpec& lag, const Point& x,
                                             const Point& y, double tau_span, int nodes,
                                             const std::optional<Path>& init = std::nullopt,
                                             const ExtremalOptions& opt = {}) {
    require(nodes >= 3, ErrorKind::invalid_argument, "find_extremal needs at least 3 nodes");
    require(tau_span > 0, ErrorKind::invalid_argument, "tau_span must be positive");
    Path path = init ? *init : Path::straight(x, y, 0.0, tau_span, nodes - 1);
    require(static_cast<int>(path.size()) == nodes, ErrorKind::invalid_argument,
            "initial path node count differs from requested node count");
    require((path.front() - x).cwiseAbs().maxCoeff() <= 1e-12 &&
                (path.back() - y).cwiseAbs().maxCoeff() <= 1e-12,
            ErrorKind::invalid_argument, "initial path endpoints differ from x and y");

    Vec r = euler_lagrange_residual(path, lag);
    double res = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    int it = 0;
    for (; it < opt.max_iterations && res >= opt.tolerance; ++it) {
        const double norm0 = r.norm();
        const Mat h = detail::euler_lagrange_jacobian(path, lag, opt.hessian_step);
        const Vec dx = h.fullPivLu().solve(-r);
        bool accepted = false;
        if (dx.allFinite()) {
            for (double t = 1.0; t > 1e-6; t *= 0.5) {
                Path trial = detail::apply_step(path, dx, t);
                if (detail::trial_norm(trial, lag) < norm0) {
                    path = std::move(trial);
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            const Vec dir = -(h.transpose() * r);
            const double slope = dir.squaredNorm();
            if (slope > 0) {
                for (double t = norm0 * norm0 / slope; t > 1e-16; t *= 0.5) {
                    Path trial = detail::apply_step(path, dir, t);
                    if (detail::trial_norm(trial, lag) < norm0) {
                        path = std::move(trial);
                        accepted = true;
                        break;
                    }
                }
            }
        }
        r = euler_lagrange_residual(path, lag);
        res = r.cwiseAbs().maxCoeff();
        if (!accepted) break;
    }
    if (!(res < opt.tolerance))
        throw ConvergenceError("extremal solver did not reach the residual tolerance after " +
                                   std::to_string(it) + " iterations",
                               res);
    return {path, res, it};
}

inline Path find_extremal(const LagrangianSpec& lag, const Point& x, const Point& y,
                          double tau_span, int nodes,
                          const std::optional<Path>& init = std::nullopt,
                          const ExtremalOptions& opt = {}) {
    return find_extremal_detailed(lag, x, y, tau_span, nodes, init, opt).path;
}

/// Action along the discrete extremal from y to x over parameter lapse eps;
/// the brute-force value of the short-time principal function.
inline double hamilton_principal_function(const LagrangianSpec& lag, const Point& x,
                                          const Point& y, double eps, int nodes = 65,
                                          const ExtremalOptions& opt = {}) {
    require(eps > 0, ErrorKind::invalid_argument, "eps must be positive");
    return action(find_extremal(lag, y, x, eps, nodes, std::nullopt, opt), lag);
}

} // namespace gaugeqm
