#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaugeqm/action.hpp"
#include "gaugeqm/path.hpp"
#include "gaugeqm/potential.hpp"

namespace gaugeqm {

/// Length transport l_y = l_x exp[a int phi'_mu dx^mu].
struct WeylTransport {
    cplx a{0.0, 0.0};
    GaugePotential potential;
};

/// Assigned gauge kappa(x) = exp(-i sigma(x)); unimodular by construction.
struct AssignedGauge {
    std::function<double(const Point&)> sigma;

    cplx kappa(const Point& x) const { return std::polar(1.0, -sigma(x)); }
    cplx kappa_inv(const Point& x) const { return std::polar(1.0, sigma(x)); }

    static AssignedGauge constant(double s) {
        return {[s](const Point&) { return s; }};
    }
};

struct PhaseVerdict {
    bool is_physical = false;
    long n = 0;            ///< round(Phi / 2 pi); reported even when not physical
    double residual = 0.0; ///< Phi - 2 pi n, in (-pi, pi]
};

inline nlohmann::json to_json(const PhaseVerdict& v) {
    return {{"is_physical", v.is_physical}, {"n", v.n}, {"residual", v.residual}};
}

inline constexpr double default_tol_phase = 1e-6;

inline cplx transport_length(cplx l0, const Path& path, const WeylTransport& t) {
    return l0 * std::exp(t.a * line_integral(path, t.potential));
}

/// |LHS - RHS| for the recalibrated transport: LHS transports l0 with the
/// one-form a phi' + kappa^{-1} d kappa (midpoint rule, gradient of sigma by
/// central differences); RHS is kappa(y) transport_length(l0) kappa^{-1}(x).
inline double recalibration_residual(cplx l0, const Path& path, const WeylTransport& t,
                                     const AssignedGauge& gauge, double grad_step = 1e-5) {
    check_path_for(path, t.potential);
    const int n = path.dim();
    cplx exponent{0.0, 0.0};
    for (int i = 0; i < path.segments(); ++i) {
        const Point c = path.midpoint(i);
        const Vec d = path.displacement(i);
        double dsigma = 0.0;
        for (int mu = 0; mu < n; ++mu) {
            const Vec e = grad_step * unit(n, mu);
            dsigma += (gauge.sigma(c + e) - gauge.sigma(c - e)) / (2 * grad_step) * d(mu);
        }
        // kappa^{-1} d_mu kappa = -i d_mu sigma
        exponent += t.a * segment_line_integral(t.potential, path.node(i), path.node(i + 1)) +
                    cplx(0.0, -dsigma);
    }
    const cplx lhs = l0 * std::exp(exponent);
    const cplx rhs =
        gauge.kappa(path.back()) * transport_length(l0, path, t) * gauge.kappa_inv(path.front());
    return std::abs(lhs - rhs);
}

/// Phi = S - sigma(y) + sigma(x) is physical when it is a multiple of 2 pi.
inline PhaseVerdict physical_check(double total_action, double sigma_x, double sigma_y,
                                   double tol_phase = default_tol_phase) {
    require(tol_phase > 0 && tol_phase < pi, ErrorKind::invalid_argument,
            "tol_phase must lie in (0, pi)");
    // grouped so that equal gauges cancel exactly
    const double phi = total_action + (sigma_x - sigma_y);
    PhaseVerdict v;
    v.n = std::lround(phi / two_pi);
    v.residual = phi - two_pi * static_cast<double>(v.n);
    if (v.residual <= -pi) {
        v.residual += two_pi;
        v.n -= 1;
    }
    v.is_physical = std::abs(v.residual) < tol_phase;
    return v;
}

/// True when the running action is strictly monotonic and |S| = 2 pi within
/// tol (constant assigned gauge).
inline bool is_elemental(const Path& path, const LagrangianSpec& lag,
                         double tol_phase = default_tol_phase) {
    const std::vector<double> run = running_action(path, lag);
    constexpr double mono_tol = 1e-12;
    bool up = true, down = true;
    for (std::size_t i = 1; i < run.size(); ++i) {
        const double d = run[i] - run[i - 1];
        up = up && d > mono_tol;
        down = down && d < -mono_tol;
    }
    if (!up && !down) return false;
    return std::abs(std::abs(run.back()) - two_pi) <= tol_phase;
}

/// p1 followed by p2; p2's parameters are shifted to start where p1 ends.
inline Path continuing_union(const Path& p1, const Path& p2) {
    require(p1.dim() == p2.dim(), ErrorKind::non_continuing, "path dimensions differ");
    require((p1.back() - p2.front()).cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::non_continuing,
            "terminal node of the first path is not the initial node of the second");
    std::vector<Point> nodes = p1.nodes();
    std::vector<double> params = p1.params();
    const double shift = p1.params().back() - p2.param(0);
    for (std::size_t i = 1; i < p2.size(); ++i) {
        nodes.push_back(p2.node(i));
        params.push_back(p2.param(i) + shift);
    }
    return Path(std::move(nodes), std::move(params));
}

} // namespace gaugeqm
