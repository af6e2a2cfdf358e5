#include <gtest/gtest.h>

#include <random>

#include "gaugeqm/gauge_kg.hpp"

using namespace gaugeqm;

namespace {

Point pt(double a, double b) {
    Point p(2);
    p << a, b;
    return p;
}

Vec vec1(double a) { return Vec::Constant(1, a); }

Path circle(double cx, double cy, double r, int turns = 1, int per_turn = 400) {
    std::vector<Point> v;
    for (int k = 0; k < per_turn * turns; ++k) {
        const double t = two_pi * k / per_turn;
        v.push_back(pt(cx + r * std::cos(t), cy + r * std::sin(t)));
    }
    return Path::polygon(v, 1);
}

cplx smooth_amplitude(const Point& x) {
    return std::exp(-0.25 * x.squaredNorm()) * cplx(1.0, 0.5 * x(0) - 0.2 * x(1));
}

std::vector<Point> off_axis_samples() {
    std::vector<Point> s;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) s.push_back(pt(1.0 + 0.25 * i, 0.5 + 0.25 * j));
    return s;
}

Path open_polyline(const std::vector<Point>& v, int per_edge = 8) {
    std::vector<Point> nodes;
    for (std::size_t e = 0; e + 1 < v.size(); ++e)
        for (int k = 0; k < per_edge; ++k)
            nodes.push_back(v[e] + (static_cast<double>(k) / per_edge) * (v[e + 1] - v[e]));
    nodes.push_back(v.back());
    std::vector<double> params(nodes.size());
    for (std::size_t i = 0; i < params.size(); ++i) params[i] = static_cast<double>(i);
    return Path::forward(nodes, params);
}

// from (-2, 0) to (2, 0) through (0, y)
Path arc_through(double y, double wobble = 0.0) {
    return open_polyline({pt(-2, 0), pt(-1, 0.5 * y + wobble), pt(0, y), pt(1, 0.5 * y - wobble), pt(2, 0)});
}

} // namespace

TEST(LineIntegral, SolenoidWindingNumbers) {
    const EMField field{potentials::solenoid(3.0)};
    EXPECT_NEAR(line_integral_phase(circle(3, 0, 1), field), 0.0, 1e-12);
    EXPECT_NEAR(line_integral_phase(circle(0.2, -0.1, 1), field), 3.0, 1e-12);
    EXPECT_NEAR(line_integral_phase(circle(0, 0, 1, 2), field), 6.0, 1e-12);
    // figure eight crossing itself at its centre
    std::vector<Point> v;
    for (int k = 0; k < 200; ++k) {
        const double t = two_pi * k / 200;
        v.push_back(pt(std::sin(t) * 2, std::sin(t) * std::cos(t)));
    }
    auto shifted = [&](const Point& by) {
        std::vector<Point> w;
        for (const Point& p : v) w.push_back(p + by);
        return Path::polygon(w, 1);
    };
    EXPECT_NEAR(line_integral_phase(shifted(pt(0.0, 0.3)), field), 0.0, 1e-12);
    // origin inside one lobe or the other: opposite orientations
    const double left = line_integral_phase(shifted(pt(1.0, 0.0)), field);
    const double right = line_integral_phase(shifted(pt(-1.0, 0.0)), field);
    EXPECT_NEAR(std::abs(left), 3.0, 1e-12);
    EXPECT_NEAR(left + right, 0.0, 1e-12);
}

TEST(CovariantIdentity, ZeroChargeIsExact) {
    const EMField field{potentials::solenoid(3.0), 0.0};
    const BranchPhase phase{field, pt(3, 0)};
    EXPECT_LT(covariant_identity_residual(field, smooth_amplitude, phase, off_axis_samples(), 0.01),
              1e-13);
}

TEST(CovariantIdentity, ConstantPotentialMatchesTheCentralDifferenceSymbol) {
    Vec c(2);
    c << 0.7, 0.0;
    const EMField field{potentials::constant(c)};
    const BranchPhase phase{field, pt(0, 0)};
    const double h = 0.05;
    const double r = covariant_identity_residual(
        field, [](const Point&) { return cplx(1.0, 0.0); }, phase, {pt(0.3, 0.2)}, h);
    EXPECT_NEAR(r, 0.7 * (1 - std::sin(0.7 * h) / (0.7 * h)), 1e-12);
}

TEST(CovariantIdentity, SecondOrderOffTheSolenoid) {
    const EMField field{potentials::solenoid(3.0)};
    const BranchPhase phase{field, pt(3, 0)};
    const double coarse = covariant_identity_residual(field, smooth_amplitude, phase, off_axis_samples(), 0.02);
    const double fine = covariant_identity_residual(field, smooth_amplitude, phase, off_axis_samples(), 0.01);
    EXPECT_NEAR(coarse / fine, 4.0, 0.6);
    const BranchSolution sol{smooth_amplitude, phase};
    EXPECT_NEAR(std::abs(sol(pt(1.2, 0.7))), std::abs(smooth_amplitude(pt(1.2, 0.7))), 1e-15);
}

TEST(CovariantIdentity, RejectsSamplesOnThePuncture) {
    const EMField field{potentials::solenoid(3.0)};
    const BranchPhase phase{field, pt(3, 0)};
    try {
        covariant_identity_residual(field, smooth_amplitude, phase, {pt(0.0, 0.005)}, 0.01);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_region);
    }
    // reaching the point behind the solenoid from the reference crosses it
    EXPECT_THROW(phase(pt(-3, 0)), Error);
}

TEST(PlaneWave, OnShellResidualIsSecondOrder) {
    const double m = 1.0;
    Vec k(2);
    k << 1.0, 0.5;
    const double omega = std::sqrt(k.squaredNorm() + m * m);
    const double coarse = plane_wave_residual(k, omega, m, {0.02});
    const double fine = plane_wave_residual(k, omega, m, {0.01});
    EXPECT_NEAR(coarse / fine, 4.0, 0.4);
    EXPECT_LT(fine, 1e-3);
}

TEST(PlaneWave, OffShellResidualIsTheMassShellGap) {
    const Vec k = vec1(1.0);
    const double m = 1.0, omega = 2.0;
    const double gap = std::abs(omega * omega - 1.0 - m * m);
    double prev = std::abs(plane_wave_residual(k, omega, m, {0.04}) - gap);
    for (double h : {0.02, 0.01, 0.005}) {
        const double err = std::abs(plane_wave_residual(k, omega, m, {h}) - gap);
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(PlaneWave, MasslessWaveAndDimensionLimit) {
    const Vec k = vec1(2.0);
    EXPECT_LT(plane_wave_residual(k, 2.0, 0.0, {0.005}), 1e-3);
    EXPECT_THROW(plane_wave_residual(Vec::Ones(3), 1.0, 1.0), Error);
}

TEST(TwoBranch, EnclosedFluxAppearsOnce) {
    const EMField field{potentials::solenoid(3.0), 2.0};
    const Path below = arc_through(-1.0), above = arc_through(1.0);
    EXPECT_NEAR(two_branch_phase(below, above, field), 2.0 * 3.0, 1e-12);
    EXPECT_NEAR(two_branch_phase(above, below, field), -2.0 * 3.0, 1e-12);
    EXPECT_NEAR(two_branch_phase(above, above, field), 0.0, 1e-15);
}

TEST(TwoBranch, DeformationsThatAvoidTheSolenoidKeepThePhase) {
    const EMField field{potentials::solenoid(1.7)};
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> wob(-0.4, 0.4), hgt(0.5, 2.0);
    for (int k = 0; k < 10; ++k) {
        const Path below = arc_through(-hgt(rng), wob(rng));
        const Path above = arc_through(hgt(rng), wob(rng));
        EXPECT_NEAR(two_branch_phase(below, above, field), 1.7, 1e-12);
    }
}

TEST(TwoBranch, PureGaugeShiftLeavesThePhase) {
    auto lambda = [](const Point& x) { return std::sin(x(0)) * x(1) + 0.3 * x(0) * x(0); };
    auto grad = [](const Point& x) {
        Vec g(2);
        g << std::cos(x(0)) * x(1) + 0.6 * x(0), std::sin(x(0));
        return g;
    };
    const EMField bare{potentials::solenoid(2.5)};
    const EMField shifted{potentials::sum(potentials::solenoid(2.5), potentials::pure_gauge(2, lambda, grad))};
    const Path below = arc_through(-1.0), above = arc_through(1.3, 0.2);
    EXPECT_NEAR(two_branch_phase(below, above, shifted), two_branch_phase(below, above, bare), 1e-12);
    // each branch alone moves by lambda(y) - lambda(x)
    EXPECT_NEAR(line_integral_phase(below, shifted) - line_integral_phase(below, bare),
                lambda(pt(2, 0)) - lambda(pt(-2, 0)), 1e-12);
}

TEST(TwoBranch, NonClosingPairIsRejected) {
    const EMField field{potentials::solenoid(1.0)};
    const Path a = arc_through(1.0);
    const Path b = open_polyline({pt(-2, 0), pt(0, -1), pt(2, 0.01)});
    try {
        two_branch_phase(a, b, field);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::non_closing);
    }
}

TEST(Superposition, IntensityLaw) {
    const cplx psi0(0.6, -0.3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int k = 0; k < 20; ++k) {
        const double a = u(rng), b = u(rng);
        EXPECT_NEAR(superposed_intensity(psi0, a, b), 2 * std::norm(psi0) * (1 + std::cos(a - b)), 1e-12);
    }
    EXPECT_NEAR(superposed_intensity(psi0, 0.0, pi), 0.0, 1e-15);
}
