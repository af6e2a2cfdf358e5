// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only N]... [--expect-fail N]...
//
// Exits 0 when the set of failing criteria equals the --expect-fail set.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gaugeqm/gaugeqm.hpp"
#include "oracles/geodesic.hpp"
#include "oracles/riemann.hpp"

using namespace gaugeqm;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (detail.tellp() > 0) detail << "; ";
        detail << what << (ok ? "" : " [violated]");
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Point pt(double a, double b) {
    Point p(2);
    p << a, b;
    return p;
}

// ---------------------------------------------------------------------------

void fringe_law(Outcome& o) {
    TwoPathSetup s;
    s.d_s = 1;
    s.d_o = 200;
    s.p = 10;
    const auto exact = fringe_positions(s, -3, 3);
    double worst = 0.0;
    int missing = 0;
    for (long n = -3; n <= 3; ++n) {
        const double analytic = static_cast<double>(n) * 40 * pi;
        const Fringe* hit = nullptr;
        for (const Fringe& f : exact)
            if (f.n == n) hit = &f;
        if (!hit) {
            ++missing;
            continue;
        }
        if (n != 0) worst = std::max(worst, std::abs(hit->x - analytic) / std::abs(analytic));
    }
    o.check(missing == 0, std::to_string(missing) + " of 7 exact roots absent (p dr reaches at most p d_s = " +
                              fmt(s.p * s.d_s) + " < 2 pi n for |n| >= 2)");
    o.check(worst <= 5e-3, "worst relative gap exact vs analytic " + fmt(worst) + " (tol 5e-3)");
    const double d = s.fringe_spacing();
    const double law = std::abs((s.d_s / s.d_o) / ((two_pi / s.p) / d) - 1);
    const auto sa = fringe_positions(s, -3, 3, GeometryMode::small_angle);
    double spacing = 0.0;
    for (std::size_t i = 1; i < sa.size(); ++i)
        spacing = std::max(spacing, std::abs((sa[i].x - sa[i - 1].x) / d - 1));
    o.check(law <= 1e-9 && spacing <= 1e-9,
            "spacing law rel " + fmt(std::max(law, spacing)) + " (tol 1e-9)");
}

void monte_carlo(Outcome& o) {
    // the reference geometry scaled by 100: d = 40 pi, every |n| <= 3 fringe within 0.02 rad
    TwoPathSetup s;
    s.d_s = 100;
    s.d_o = 20000;
    s.p = 10;
    McSampler cfg;
    cfg.samples = 100000;
    cfg.tol_phase = 0.15;
    cfg.seed = 2024;
    cfg.workers = 1;
    const McHistogram a = mc_density(s, cfg);
    cfg.workers = 4;
    const McHistogram b = mc_density(s, cfg);
    const McHistogram c = mc_density(s, cfg);
    const auto modes = histogram_modes(a);
    double worst = 0.0;
    for (long n = -3; n <= 3; ++n) {
        double best = 1e300;
        for (double m : modes) best = std::min(best, std::abs(m - static_cast<double>(n) * 40 * pi));
        worst = std::max(worst, best);
    }
    o.check(worst <= a.bin_width, "worst mode offset " + fmt(worst) + " (bin " + fmt(a.bin_width) + ")");
    o.check(a.counts == b.counts && b.counts == c.counts && a.density == c.density,
            "histograms identical across reruns and worker counts 1/4");
}

void decoherence(Outcome& o) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    int agree = 0, at_threshold = 0;
    for (int k = 0; k < 100; ++k) {
        TwoPathSetup s;
        s.d_s = u(rng);
        s.d_o = 100 * u(rng);
        s.p = 10 * u(rng);
        const double p_ph = k % 4 == 0 ? two_pi / s.d_s : 2 * u(rng);
        at_threshold += k % 4 == 0;
        const MeasurementImpact m = measurement_impact(s, ScatterProbe::averaged(p_ph));
        const bool half = m.s >= 0.5 * s.fringe_spacing() * (1 - 1e-12);
        const bool product = s.d_s * p_ph >= two_pi * (1 - 1e-12);
        agree += (half == product && product == m.which_path);
    }
    o.check(agree == 100, std::to_string(agree) + "/100 draws agree (" + std::to_string(at_threshold) +
                              " exactly at threshold)");
}

void ab_effect(Outcome& o) {
    TwoPathSetup s;
    s.d_s = 1;
    s.d_o = 200;
    s.p = 10;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10);
    double period = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double ef = u(rng);
        const FluxSweep sw = ab_flux_sweep(s, {ef, ef + two_pi});
        for (std::size_t i = 0; i < sw.patterns[0].density.size(); ++i)
            period = std::max(period, std::abs(sw.patterns[0].density[i] - sw.patterns[1].density[i]));
    }
    o.check(period <= 1e-12, "period-2pi gap " + fmt(period) + " (tol 1e-12)");

    const FluxSweep sw = ab_flux_sweep(s, {0.0, pi / 2});
    const double expected_rate = -s.d_o / (s.p * s.d_s);
    double rate = 0.0;
    for (const Fringe& f : sw.patterns[1].maxima_small_angle)
        for (const Fringe& g : sw.patterns[0].maxima_small_angle)
            if (f.n == g.n) rate = std::max(rate, std::abs((f.x - g.x) / (pi / 2) - expected_rate));
    o.check(rate <= 1e-9 && std::abs(sw.shift_rate - expected_rate) <= 1e-9,
            "shift rate gap " + fmt(rate) + " (tol 1e-9)");

    const PatternResult base = density_pattern(s);
    double at_max = 0.0, at_min = 0.0;
    for (int k : {-2, 1, 3}) {
        TwoPathSetup t = s;
        t.flux_term = two_pi * k;
        const PatternResult r = density_pattern(t);
        for (std::size_t i = 0; i < r.maxima.size(); ++i)
            at_max = std::max(at_max, std::abs(r.maxima[i].x - base.maxima[i].x));
        t.flux_term = pi * (2 * k + 1);
        for (const Fringe& f : base.maxima)
            at_min = std::max(at_min, 1 + std::cos(t.p * path_length_difference(t, f.x) + t.flux_term));
    }
    o.check(at_max <= 1e-9 && at_min <= 1e-12,
            "maxima drift at 2 pi k " + fmt(at_max) + ", density at odd pi " + fmt(at_min));
}

void curvature(Outcome& o) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> th(0.3, 2.8), ph(-3, 3), yy(0.3, 3), xx(-2, 2);
    struct Case {
        ChartMetric m;
        std::function<Point()> draw;
    };
    const std::vector<Case> cases{
        {metrics::flat(2), [&] { return pt(xx(rng), xx(rng)); }},
        {metrics::sphere(2.0), [&] { return pt(th(rng), ph(rng)); }},
        {metrics::hyperbolic2(), [&] { return pt(xx(rng), yy(rng)); }},
    };
    for (const Case& c : cases) {
        double worst = 0.0, r_abs = 0.0;
        for (int k = 0; k < 100; ++k) {
            const Point x = c.draw();
            const double r = metric_jet(c.m, x).ricci_scalar;
            worst = std::max(worst, std::abs(r - oracle::ricci_scalar(c.m, x)));
            r_abs = std::abs(r);
        }
        o.check(worst <= 1e-5, c.m.name + " |R| " + fmt(r_abs) + " oracle gap " + fmt(worst));
    }
}

void extremals(Outcome& o) {
    const auto flat = LagrangianSpec::massive(metrics::flat(2), 1.0);
    const Path guess = Path::straight(pt(0, 0), pt(2, 1), 0.0, 1.0, 10);
    std::vector<Point> bent;
    for (std::size_t i = 1; i + 1 < guess.size(); ++i)
        bent.push_back(guess.node(i) + pt(0.1 * std::sin(static_cast<double>(i)), 0.2));
    const Path fp = find_extremal(flat, pt(0, 0), pt(2, 1), 1.0, 11, guess.with_interior(bent));
    const Vec d = (fp.back() - fp.front()).normalized();
    double coll = 0.0;
    for (std::size_t i = 0; i < fp.size(); ++i) {
        const Vec r = fp.node(i) - fp.front();
        coll = std::max(coll, std::abs(r(0) * d(1) - r(1) * d(0)));
    }
    o.check(coll <= 1e-8, "flat collinearity " + fmt(coll));

    const ChartMetric sph = metrics::sphere(1.0);
    const auto lag = LagrangianSpec::massive(sph, 1.0);
    const Point x = pt(1.0, 0.0), y = pt(1.5, 1.1);
    const Path p = find_extremal(lag, x, y, 1.0, 65);
    const auto ref = oracle::shoot_geodesic(sph, x, y, 1.0, p.params());
    double dev = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) dev = std::max(dev, (p.node(i) - ref[i]).cwiseAbs().maxCoeff());
    o.check(dev < 1e-4, "sphere vs shooting " + fmt(dev));

    const Path q = find_extremal(lag, x, y, 1.0, 33);
    const double s0 = action(q, lag);
    const Vec dir = pt(0.6, -0.8);
    std::vector<double> deltas{1e-2, 5e-3, 2.5e-3}, changes;
    for (double dl : deltas) {
        std::vector<Point> interior;
        for (std::size_t k = 1; k + 1 < q.size(); ++k)
            interior.push_back(q.node(k) + dl * std::sin(pi * static_cast<double>(k) / q.segments()) * dir);
        changes.push_back(std::abs(action(q.with_interior(interior), lag) - s0));
    }
    const double slope = loglog_slope(deltas, changes);
    o.check(slope >= 1.9, "perturbation slope " + fmt(slope));
}

void hj_order(Outcome& o) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const HJExpansion flat(metrics::flat(2), pt(0.2, 0.4), 1.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) worst = std::max(worst, hj_residual(flat, pt(u(rng), u(rng)), 0.1));
    o.check(worst <= 1e-10, "flat residual " + fmt(worst));
    const std::vector<double> sizes{0.02, 0.04, 0.08};
    const Vec dir = pt(0.6, 0.8);
    for (auto [label, variant] : {std::pair{"selected", ExpansionVariant::selected()},
                                  std::pair{"printed", ExpansionVariant::printed()}}) {
        const HJExpansion e(metrics::sphere(2.0), pt(1.0, 0.2), 1.0, variant);
        std::vector<double> r;
        for (double s : sizes) r.push_back(hj_residual(e, s * dir, 0.1));
        const double slope = loglog_slope(sizes, r);
        if (std::string(label) == "selected")
            o.check(slope >= 2.8, "sphere slope (selected form) " + fmt(slope));
        else
            o.detail << "; printed-form slope " << fmt(slope);
    }
}

void moments(Outcome& o) {
    const Mat g = Eigen::Vector2d(1.0, 4.0).asDiagonal();
    const MomentSet c = moments_closed_form(g, 1.0, 0.0);
    o.check(c.Q == cplx(1.0) && c.Q_vec.cwiseAbs().maxCoeff() == 0.0, "closed form Q = 1, Q^l = 0 exactly");
    const MomentSet s = moments_extrapolated(g, 1.0, {0.3, 0.2, 0.1, 0.05});
    const CMat expected = cplx(0.0, 0.5) * g.inverse().cast<cplx>();
    const double gap = (s.Q_mat - expected).cwiseAbs().maxCoeff();
    o.check(gap <= 1e-3, "extrapolated Q^{le} gap " + fmt(gap) + ", Q gap " + fmt(std::abs(s.Q - 1.0)));
}

void klein_gordon(Outcome& o) {
    Vec k(2);
    k << 1.0, 0.5;
    const double m = 1.0;
    const double omega = std::sqrt(k.squaredNorm() + m * m);
    const double ratio = plane_wave_residual(k, omega, m, {0.02}) / plane_wave_residual(k, omega, m, {0.01});
    o.check(std::abs(ratio / 4 - 1) <= 0.1, "on-shell ratio " + fmt(ratio));
    const double off = 2.0;
    const double gap = std::abs(off * off - k.squaredNorm() - m * m);
    std::vector<double> errs;
    for (double h : {0.02, 0.01, 0.005}) errs.push_back(std::abs(plane_wave_residual(k, off, m, {h}) - gap));
    o.check(errs[2] < errs[1] && errs[1] < errs[0] && errs[2] <= 1e-3 * gap,
            "off-shell distance to |w^2 - k^2 - m^2| " + fmt(errs[0]) + " -> " + fmt(errs[2]));
}

void kernel(Outcome& o) {
    std::vector<double> epss{0.02, 0.01, 0.005}, rel;
    for (double eps : epss) {
        WaveField f = WaveField::ring(metrics::ring_warp(0.1), 0.0, two_pi, 512);
        f.fill([](const Point& x) {
            return cplx(std::cos(x(0)) + 0.3 * std::sin(2 * x(0)), 0.2 * std::cos(x(0)));
        });
        rel.push_back(kernel_consistency(f, 1.0, eps, 0.1 * eps));
    }
    o.check(rel.back() <= 0.05, "relative gap at eps 0.005: " + fmt(rel.back()));
    const double order = loglog_slope(epss, rel);
    o.check(order >= 1.0, "fitted order " + fmt(order));
}

void gauge_invariance(Outcome& o) {
    WaveField f(metrics::sphere(2.0), {GridAxis::dirichlet(0.4, pi - 0.4, 16), GridAxis::periodic(0, two_pi, 12)});
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n01;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values(i) = cplx(n01(rng), n01(rng));
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const double a = n01(rng), b = n01(rng), c = n01(rng);
        const WaveField g = apply_gauge(f, [&](const Point& x) { return 5 * a * std::sin(b * x(0)) + c * x(1) * x(1); });
        const Vec d0 = born_density(f), d1 = born_density(g);
        for (Eigen::Index i = 0; i < d0.size(); ++i) worst = std::max(worst, std::abs(d1(i) - d0(i)) / d0(i));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    o.check(worst <= 8 * eps, "Born density relative change " + fmt(worst) + " (" + fmt(worst / eps) + " ulp)");

    Vec cst(2);
    cst << 0.3, -0.2;
    const WeylTransport t{cplx(0.1, -0.5), potentials::constant(cst)};
    const AssignedGauge sg{[](const Point& x) { return std::sin(x(0)) * x(1) + 0.4 * std::cos(2 * x(1)); }};
    const double r200 = recalibration_residual(1.0, Path::straight(pt(0, 0), pt(1.5, 2), 0, 1, 200), t, sg);
    const double r400 = recalibration_residual(1.0, Path::straight(pt(0, 0), pt(1.5, 2), 0, 1, 400), t, sg);
    const double order = observed_order(r200, r400);
    o.check(order >= 1.8, "recalibration order " + fmt(order) + " (M 200 -> 400)");
}

void covariant_identity(Outcome& o) {
    const EMField field{potentials::solenoid(3.0)};
    const BranchPhase phase{field, pt(3, 0)};
    auto psi0 = [](const Point& x) { return std::exp(-0.25 * x.squaredNorm()) * cplx(1.0, 0.5 * x(0) - 0.2 * x(1)); };
    std::vector<Point> samples;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) samples.push_back(pt(1.0 + 0.25 * i, 0.5 + 0.25 * j));
    const double ratio = covariant_identity_residual(field, psi0, phase, samples, 0.02) /
                         covariant_identity_residual(field, psi0, phase, samples, 0.01);
    o.check(std::abs(ratio / 4 - 1) <= 0.15, "residual ratio " + fmt(ratio));
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only, expect_fail;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        const int id = std::atoi(argv[i + 1]);
        if (flag == "--only") only.insert(id);
        else if (flag == "--expect-fail") expect_fail.insert(id);
        else {
            std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
            return 2;
        }
    }
    const std::vector<std::pair<std::string, void (*)(Outcome&)>> criteria{
        {"fringe law", fringe_law},           {"monte carlo cross-check", monte_carlo},
        {"decoherence threshold", decoherence}, {"AB periodicity and shift", ab_effect},
        {"curvature", curvature},             {"extremal solver", extremals},
        {"Hamilton-Jacobi order", hj_order},  {"moments", moments},
        {"Klein-Gordon", klein_gordon},       {"kernel consistency", kernel},
        {"gauge invariance", gauge_invariance}, {"covariant identity", covariant_identity},
    };
    std::set<int> failed;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << (o.detail.tellp() > 0 ? "; " : "") << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) failed.insert(id);
        std::printf("%-4s criterion %2d %-26s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id,
                    criteria[i].first.c_str(), o.detail.str().c_str(), secs);
    }
    std::set<int> expected;
    for (int id : expect_fail)
        if (only.empty() || only.count(id)) expected.insert(id);
    if (failed != expected) {
        std::printf("unexpected outcome: %zu failing, %zu expected to fail\n", failed.size(), expected.size());
        return 1;
    }
    if (!failed.empty()) std::printf("%zu criterion(s) fail as documented\n", failed.size());
    return 0;
}
