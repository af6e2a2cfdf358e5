#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "gaugeqm/error.hpp"
#include "gaugeqm/linalg.hpp"
#include "gaugeqm/path.hpp"

namespace gaugeqm {

/// A one-form phi_mu on the chart.
///
/// `segment_integral`, when set, returns the exact integral along the
/// straight segment a -> b (presets whose primitive is known); otherwise
/// line integrals use the midpoint rule. `segment_ok` rejects segments that
/// leave the domain, e.g. through a puncture.
struct GaugePotential {
    int dim = 0;
    std::string name;
    std::function<Vec(const Point&)> components;
    std::function<double(const Point&, const Point&)> segment_integral;
    std::function<bool(const Point&, const Point&)> segment_ok;

    Vec operator()(const Point& x) const { return components(x); }

    bool is_exact_on_segments() const { return static_cast<bool>(segment_integral); }
};

namespace potentials {

inline GaugePotential zero(int n) {
    GaugePotential p;
    p.dim = n;
    p.name = "zero";
    p.components = [n](const Point&) { return Vec(Vec::Zero(n)); };
    p.segment_integral = [](const Point&, const Point&) { return 0.0; };
    return p;
}

inline GaugePotential constant(const Vec& c) {
    GaugePotential p;
    p.dim = static_cast<int>(c.size());
    p.name = "constant";
    p.components = [c](const Point&) { return c; };
    p.segment_integral = [c](const Point& a, const Point& b) { return c.dot(b - a); };
    return p;
}

/// phi = grad(lambda): integrates exactly to lambda(b) - lambda(a).
inline GaugePotential pure_gauge(int n, std::function<double(const Point&)> lambda,
                                 std::function<Vec(const Point&)> grad) {
    GaugePotential p;
    p.dim = n;
    p.name = "pure-gauge";
    p.components = std::move(grad);
    p.segment_integral = [lambda](const Point& a, const Point& b) { return lambda(b) - lambda(a); };
    return p;
}

/// Generic one-form, integrated by the midpoint rule.
inline GaugePotential generic(int n, std::function<Vec(const Point&)> phi,
                              std::string name = "generic") {
    GaugePotential p;
    p.dim = n;
    p.name = std::move(name);
    p.components = std::move(phi);
    return p;
}

/// Signed angle subtended at the origin by the segment a -> b.
inline double subtended_angle(const Point& a, const Point& b) {
    const double cross = a(0) * b(1) - a(1) * b(0);
    const double dot = a(0) * b(0) + a(1) * b(1);
    return std::atan2(cross, dot);
}

/// Distance from the origin to the segment a -> b in the plane.
inline double distance_to_origin(const Point& a, const Point& b) {
    const Vec d = b - a;
    const double len2 = d.squaredNorm();
    double t = len2 > 0 ? -a.dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (a + t * d).norm();
}

/// Thin solenoid at the origin carrying flux f: phi = (f / 2 pi) d(theta)
/// on the punctured plane.
inline GaugePotential solenoid(double flux) {
    GaugePotential p;
    p.dim = 2;
    p.name = "solenoid:" + std::to_string(flux);
    const double c = flux / two_pi;
    p.components = [c](const Point& x) {
        const double r2 = x(0) * x(0) + x(1) * x(1);
        Vec v(2);
        v << -c * x(1) / r2, c * x(0) / r2;
        return v;
    };
    p.segment_integral = [c](const Point& a, const Point& b) { return c * subtended_angle(a, b); };
    p.segment_ok = [](const Point& a, const Point& b) {
        const double scale = std::max({1.0, a.norm(), b.norm()});
        return distance_to_origin(a, b) > 1e-12 * scale;
    };
    return p;
}

/// Pointwise sum; exact on segments when both terms are.
inline GaugePotential sum(const GaugePotential& a, const GaugePotential& b) {
    require(a.dim == b.dim, ErrorKind::invalid_argument, "potential dimensions differ");
    GaugePotential p;
    p.dim = a.dim;
    p.name = a.name + "+" + b.name;
    p.components = [a, b](const Point& x) { return Vec(a.components(x) + b.components(x)); };
    if (a.segment_integral && b.segment_integral)
        p.segment_integral = [a, b](const Point& u, const Point& v) {
            return a.segment_integral(u, v) + b.segment_integral(u, v);
        };
    if (a.segment_ok || b.segment_ok)
        p.segment_ok = [a, b](const Point& u, const Point& v) {
            return (!a.segment_ok || a.segment_ok(u, v)) && (!b.segment_ok || b.segment_ok(u, v));
        };
    return p;
}

/// Presets by id: "solenoid:<f>", "zero-<N>".
inline GaugePotential by_name(const std::string& id) {
    if (id.rfind("solenoid:", 0) == 0) {
        std::size_t used = 0;
        const std::string s = id.substr(9);
        double f = 0;
        try {
            f = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(!s.empty() && used == s.size(), ErrorKind::invalid_argument,
                "cannot parse flux in potential id '" + id + "'");
        return solenoid(f);
    }
    if (id.rfind("zero-", 0) == 0) return zero(std::stoi(id.substr(5)));
    throw Error(ErrorKind::invalid_argument, "unknown potential id '" + id + "'");
}

} // namespace potentials

/// Throws invalid-path unless every segment is admissible for the potential.
inline void check_path_for(const Path& path, const GaugePotential& phi) {
    require(path.dim() == phi.dim, ErrorKind::invalid_path,
            "path dimension does not match potential dimension");
    if (!phi.segment_ok) return;
    for (int i = 0; i < path.segments(); ++i)
        require(phi.segment_ok(path.node(i), path.node(i + 1)), ErrorKind::invalid_path,
                "segment " + std::to_string(i) + " passes through a puncture of '" + phi.name +
                    "'");
}

/// Integral of phi along one segment.
inline double segment_line_integral(const GaugePotential& phi, const Point& a, const Point& b) {
    if (phi.segment_integral) return phi.segment_integral(a, b);
    return phi.components(0.5 * (a + b)).dot(b - a);
}

/// Discrete line integral sum_i phi(x_{i+1/2}) . dx_i (exact per segment for
/// presets that know their primitive).
inline double line_integral(const Path& path, const GaugePotential& phi) {
    check_path_for(path, phi);
    double s = 0.0;
    for (int i = 0; i < path.segments(); ++i)
        s += segment_line_integral(phi, path.node(i), path.node(i + 1));
    return s;
}

} // namespace gaugeqm
