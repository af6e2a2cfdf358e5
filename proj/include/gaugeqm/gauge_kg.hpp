#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "gaugeqm/metrics.hpp"
#include "gaugeqm/path.hpp"
#include "gaugeqm/potential.hpp"
#include "gaugeqm/propagator.hpp"
#include "gaugeqm/wavefield.hpp"

namespace gaugeqm {

struct EMField {
    GaugePotential potential;
    double e = 1.0;
};

/// S(rho) = int_rho phi_mu dx^mu (exact per segment for the presets).
inline double line_integral_phase(const Path& path, const EMField& field) {
    return line_integral(path, field.potential);
}

/// Branch phase field: S(x) integrated along the straight segment from a
/// reference point. Single-valued wherever that segment avoids punctures,
/// e.g. on the half-plane containing one branch.
struct BranchPhase {
    EMField field;
    Point reference;

    double operator()(const Point& x) const {
        const GaugePotential& phi = field.potential;
        require(!phi.segment_ok || phi.segment_ok(reference, x), ErrorKind::invalid_region,
                "segment from the branch reference crosses a puncture");
        if (phi.segment_integral) return phi.segment_integral(reference, x);
        // midpoint rule on a fine subdivision for generic potentials
        constexpr int pieces = 64;
        double s = 0.0;
        for (int k = 0; k < pieces; ++k) {
            const Point a = reference + (static_cast<double>(k) / pieces) * (x - reference);
            const Point b = reference + (static_cast<double>(k + 1) / pieces) * (x - reference);
            s += phi.components(0.5 * (a + b)).dot(b - a);
        }
        return s;
    }
};

/// A branch psi_0 exp(-i e S) of the charged solution.
struct BranchSolution {
    std::function<cplx(const Point&)> psi0;
    BranchPhase phase;

    cplx operator()(const Point& x) const {
        return psi0(x) * std::polar(1.0, -phase.field.e * phase(x));
    }
};

/// max over samples and directions of
/// |(d_mu + i e phi_mu)(psi0 e^{-ieS}) - e^{-ieS} d_mu psi0|, central
/// differences of step h on both derivatives.
inline double covariant_identity_residual(const EMField& field,
                                          const std::function<cplx(const Point&)>& psi0,
                                          const std::function<double(const Point&)>& phase,
                                          const std::vector<Point>& samples, double h) {
    require(h > 0, ErrorKind::invalid_argument, "step must be positive");
    require(!samples.empty(), ErrorKind::invalid_region, "no sample points");
    const GaugePotential& phi = field.potential;
    const int n = phi.dim;
    const cplx ie(0.0, field.e);
    auto branch = [&](const Point& x) { return psi0(x) * std::exp(-ie * phase(x)); };
    double worst = 0.0;
    for (const Point& x : samples) {
        require(x.size() == n, ErrorKind::invalid_region, "sample dimension mismatch");
        for (int mu = 0; mu < n; ++mu) {
            const Vec d = h * unit(n, mu);
            require(!phi.segment_ok || phi.segment_ok(x - d, x + d), ErrorKind::invalid_region,
                    "sampled region touches a puncture of '" + phi.name + "'");
            const cplx dbranch = (branch(x + d) - branch(x - d)) / (2 * h);
            const cplx dpsi = (psi0(x + d) - psi0(x - d)) / (2 * h);
            const cplx lhs = dbranch + ie * phi.components(x)(mu) * branch(x);
            const cplx rhs = std::exp(-ie * phase(x)) * dpsi;
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

/// Grid for the plane-wave check: (1+N) Minkowski chart, `n` nodes per
/// axis with spacing h, centred at `origin` (Dirichlet data from the wave).
struct PlaneWaveGrid {
    double h = 0.01;
    int n = 5;
    double origin = 0.0;
};

/// Discrete residual of (box + m^2) on psi = exp(i(k.x - omega t)).
inline double plane_wave_residual(const Vec& k, double omega, double m,
                                  const PlaneWaveGrid& grid = {}) {
    const int n = static_cast<int>(k.size()) + 1;
    require(n <= 3, ErrorKind::invalid_argument, "plane waves support up to two spatial axes");
    std::vector<GridAxis> axes;
    const double half = 0.5 * grid.h * (grid.n - 1);
    for (int a = 0; a < n; ++a)
        axes.push_back(GridAxis::dirichlet(grid.origin - half, grid.origin + half, grid.n));
    WaveField f(metrics::minkowski(n), axes);
    f.fill([&](const Point& x) {
        return std::polar(1.0, k.dot(x.tail(n - 1)) - omega * x(0));
    });
    return kg_residual(f, m);
}

/// e (S(rho1) - S(rho2)) for branches sharing both endpoints.
inline double two_branch_phase(const Path& rho1, const Path& rho2, const EMField& field) {
    require(rho1.dim() == rho2.dim(), ErrorKind::non_closing, "branch dimensions differ");
    require((rho1.front() - rho2.front()).cwiseAbs().maxCoeff() <= 1e-12 &&
                (rho1.back() - rho2.back()).cwiseAbs().maxCoeff() <= 1e-12,
            ErrorKind::non_closing, "branches do not share both endpoints");
    return field.e * (line_integral_phase(rho1, field) - line_integral_phase(rho2, field));
}

/// |psi0 e^{-i phase1} + psi0 e^{-i phase2}|^2.
inline double superposed_intensity(cplx psi0, double phase1, double phase2) {
    return std::norm(psi0 * std::polar(1.0, -phase1) + psi0 * std::polar(1.0, -phase2));
}

} // namespace gaugeqm
