// gaugeqm: batch front end.
//
//   gaugeqm <experiment> [--config file.json] [--out dir] [--seed n] [--dry-run]
//
// Exit codes: 0 all checks pass, 1 config or validation error, 2 convergence
// failure, 3 a check missed its tolerance.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaugeqm/gaugeqm.hpp"

using namespace gaugeqm;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Reports

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct Report {
    std::vector<Check> checks;
    json results = json::object();
    std::vector<std::pair<std::string, std::string>> csv; // file name, content

    void at_most(const std::string& name, double value, double tol) {
        checks.push_back({name, value, tol, value <= tol});
    }
    void at_least(const std::string& name, double value, double tol) {
        checks.push_back({name, value, tol, value >= tol});
    }
};

std::string num(double v) {
    if (v == 0) v = 0.0; // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << num(values[i]);
        os_ << '\n';
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

// ---------------------------------------------------------------------------
// Config plumbing

/// Overlays `user` on `defaults`; keys absent from the defaults are rejected.
/// Nested objects with non-empty defaults merge recursively.
json merge_strict(const json& defaults, const json& user, const std::string& path) {
    require(user.is_object(), ErrorKind::config, path + " must be an object");
    json out = defaults;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string field = path + "." + it.key();
        require(defaults.contains(it.key()), ErrorKind::config, "unknown field " + field);
        const json& d = defaults[it.key()];
        if (d.is_object() && !d.empty())
            out[it.key()] = merge_strict(d, it.value(), field);
        else
            out[it.key()] = it.value();
    }
    return out;
}

json strip_nulls(const json& j) {
    if (!j.is_object()) return j;
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!it.value().is_null()) out[it.key()] = strip_nulls(it.value());
    return out;
}

ChartMetric metric_from(const json& j, const std::string& field) {
    try {
        if (j.is_string()) return metrics::by_name(j.get<std::string>());
        return metrics::from_json(j);
    } catch (const Error& e) {
        throw Error(ErrorKind::config, field + ": " + e.what());
    }
}

Point point_from(StrictObject& o, const std::string& key) {
    const std::vector<double> v = o.numbers(key);
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat matrix_from(const json& j, const std::string& field) {
    require(j.is_array() && !j.empty(), ErrorKind::config, field + " must be a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    Mat g(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n, ErrorKind::config,
                field + " must be square");
        for (Eigen::Index c = 0; c < n; ++c) {
            require(row[static_cast<std::size_t>(c)].is_number(), ErrorKind::config,
                    field + " entries must be numbers");
            g(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Experiments

const double four_pi = 2 * two_pi;

Report geometry_check(const json& params) {
    StrictObject o(params, "parameters");
    const ChartMetric m = metric_from(params.at("metric"), "parameters.metric");
    (void)o.raw("metric");
    const auto points = o.integer("points");
    require(points >= 1, ErrorKind::config, "parameters.points must be >= 1");
    const std::uint64_t seed = o.unsigned_integer("seed", 0);
    std::vector<std::pair<double, double>> box;
    if (!params.at("box").is_null()) {
        const json& b = params.at("box");
        require(b.is_array() && static_cast<int>(b.size()) == m.dim, ErrorKind::config,
                "parameters.box needs one [lo, hi] pair per coordinate");
        for (const json& r : b) {
            require(r.is_array() && r.size() == 2 && r[0].is_number() && r[1].is_number() &&
                        r[0].get<double>() < r[1].get<double>(),
                    ErrorKind::config, "parameters.box entries must be [lo, hi] with lo < hi");
            box.emplace_back(r[0].get<double>(), r[1].get<double>());
        }
    } else if (m.name.rfind("sphere", 0) == 0) {
        box = {{0.3, 2.8}, {-3.0, 3.0}};
    } else if (m.name == "hyperbolic2") {
        box = {{-2.0, 2.0}, {0.3, 3.0}};
    } else if (m.name.rfind("ring-warp", 0) == 0) {
        box = {{0.0, two_pi}};
    } else {
        box.assign(static_cast<std::size_t>(m.dim), {-1.0, 1.0});
    }
    (void)o.raw("box");
    std::optional<double> expected;
    if (!params.at("expected_R").is_null()) expected = o.number("expected_R");
    (void)o.raw("expected_R");
    StrictObject tol = o.object("tolerances");
    const double tol_fd = tol.number("ricci_fd");
    const double tol_expected = tol.number("expected_R");
    tol.finish();
    o.finish();

    const ChartMetric fd = with_central_differences(m);
    std::mt19937_64 rng(seed);
    std::vector<std::string> header;
    for (int a = 0; a < m.dim; ++a) header.push_back("x" + std::to_string(a + 1));
    header.push_back("R");
    header.push_back("R_fd");
    Csv csv(header);
    double gap_fd = 0.0, gap_expected = 0.0;
    int bad_signature = 0;
    for (long long k = 0; k < points; ++k) {
        Point x(m.dim);
        for (int a = 0; a < m.dim; ++a) {
            std::uniform_real_distribution<double> u(box[a].first, box[a].second);
            x(a) = u(rng);
        }
        const double r = metric_jet(m, x).ricci_scalar;
        const double r_fd = metric_jet(fd, x).ricci_scalar;
        gap_fd = std::max(gap_fd, std::abs(r - r_fd));
        if (expected) gap_expected = std::max(gap_expected, std::abs(r - *expected));
        bad_signature += !signature_holds(m, x);
        std::vector<double> row(x.data(), x.data() + x.size());
        row.push_back(r);
        row.push_back(r_fd);
        csv.row(row);
    }
    Report rep;
    rep.at_most("ricci_vs_finite_difference_jet", gap_fd, tol_fd);
    if (expected) rep.at_most("ricci_vs_expected", gap_expected, tol_expected);
    rep.at_most("signature_violations", bad_signature, 0);
    rep.results = {{"metric", m.name}, {"points", points}};
    rep.csv.emplace_back("geometry_check.csv", csv.str());
    return rep;
}

Report extremal(const json& params) {
    StrictObject o(params, "parameters");
    const ChartMetric m = metric_from(params.at("metric"), "parameters.metric");
    (void)o.raw("metric");
    const double mass = o.number("mass");
    require_positive(mass, "parameters.mass");
    const double charge = o.number("charge");
    std::optional<GaugePotential> phi;
    if (!params.at("potential").is_null()) {
        try {
            phi = potentials::by_name(o.string("potential"));
        } catch (const Error& e) {
            throw Error(ErrorKind::config, std::string("parameters.potential: ") + e.what());
        }
    }
    (void)o.raw("potential");
    const Point x = point_from(o, "x");
    const Point y = point_from(o, "y");
    require(x.size() == m.dim && y.size() == m.dim, ErrorKind::config,
            "parameters.x and parameters.y need " + std::to_string(m.dim) + " coordinates");
    const double span = o.number("tau_span");
    require_positive(span, "parameters.tau_span");
    const auto nodes = o.integer("nodes");
    require(nodes >= 3, ErrorKind::config, "parameters.nodes must be >= 3");
    ExtremalOptions opt;
    opt.max_iterations = static_cast<int>(o.integer("max_iterations"));
    const double sigma_x = o.number("sigma_x"), sigma_y = o.number("sigma_y");
    StrictObject tol = o.object("tolerances");
    opt.tolerance = tol.number("residual");
    const double tol_phase = tol.number("phase");
    tol.finish();
    o.finish();

    const LagrangianSpec lag = phi ? LagrangianSpec::charged(m, mass, charge, *phi)
                                   : LagrangianSpec::massive(m, mass);
    const ExtremalResult r = find_extremal_detailed(lag, x, y, span, static_cast<int>(nodes), std::nullopt, opt);
    const double s = action(r.path, lag);
    const PhaseVerdict v = physical_check(s, sigma_x, sigma_y, tol_phase);
    Report rep;
    rep.at_most("euler_lagrange_residual", r.residual, opt.tolerance);
    rep.results = {{"action", s}, {"iterations", r.iterations}, {"verdict", to_json(v)}};
    std::ostringstream os;
    write_path_csv(os, r.path);
    rep.csv.emplace_back("extremal.csv", os.str());
    return rep;
}

DoubleSlitConfig slit_from(const json& params, const std::vector<std::string>& extra) {
    json core = strip_nulls(params);
    for (const std::string& k : extra) core.erase(k);
    StrictObject o(core, "parameters");
    DoubleSlitConfig c = double_slit_from_json(o);
    o.finish();
    return c;
}

Report double_slit(const json& params) {
    const DoubleSlitConfig c = slit_from(params, {"tolerances", "mc_orders"});
    StrictObject tol(params.at("tolerances"), "parameters.tolerances");
    const double tol_law = tol.number("spacing_law");
    const double tol_root = tol.number("maxima_phase");
    const double tol_bins = tol.number("mc_mode_bins");
    tol.finish();
    require(params.at("mc_orders").is_number_integer(), ErrorKind::config,
            "parameters.mc_orders must be an integer");
    const long orders = params.at("mc_orders").get<long>();

    const PatternResult r = density_pattern(c.setup, c.probe);
    Report rep;
    const TwoPathSetup& s = c.setup;
    rep.at_most("spacing_law", std::abs((s.d_s / s.d_o) / ((two_pi / s.p) / r.d) - 1), tol_law);
    double root = 0.0;
    for (const Fringe& f : r.maxima)
        root = std::max(root, std::abs(std::remainder(s.p * path_length_difference(s, f.x) + r.phase_offset, two_pi)));
    rep.at_most("maxima_phase_condition", root, tol_root);
    const bool half = r.s >= 0.5 * r.d * (1 - 1e-12);
    rep.at_most("which_path_consistency", half == r.which_path ? 0.0 : 1.0, 0.0);

    json summary = pattern_summary(r);
    json small = json::array();
    for (const Fringe& f : r.maxima_small_angle) small.push_back(f.x);
    summary["maxima_small_angle"] = small;
    summary["phase_offset"] = r.phase_offset;
    json warnings = json::array();
    for (const std::string& w : s.warnings()) warnings.push_back(w);
    summary["warnings"] = warnings;

    Csv csv({"x_hat", "density"});
    for (std::size_t i = 0; i < r.x_hat.size(); ++i) csv.row({r.x_hat[i], r.density[i]});
    rep.csv.emplace_back("double_slit.csv", csv.str());

    if (c.mc) {
        // the sampler sees the bare two-beam setup, without the probe
        const McHistogram h = mc_density(s, *c.mc);
        const auto modes = histogram_modes(h);
        double worst = 0.0;
        int compared = 0;
        for (const Fringe& f : fringe_positions(s, -orders, orders)) {
            double best = 1e300;
            for (double mo : modes) best = std::min(best, std::abs(mo - f.x));
            worst = std::max(worst, best / h.bin_width);
            ++compared;
        }
        rep.at_most("mc_mode_offset_in_bins", worst, tol_bins);
        summary["mc"] = {{"accepted", h.accepted}, {"bin_width", h.bin_width},
                         {"modes", modes}, {"maxima_compared", compared}};
        Csv hc({"x_hat", "count", "density"});
        for (std::size_t b = 0; b < h.counts.size(); ++b)
            hc.row({h.center(b), static_cast<double>(h.counts[b]), h.density[b]});
        rep.csv.emplace_back("double_slit_mc.csv", hc.str());
    }
    rep.results = summary;
    return rep;
}

Report ab_sweep(const json& params) {
    const DoubleSlitConfig c = slit_from(params, {"tolerances", "flux"});
    StrictObject fl(params.at("flux"), "parameters.flux");
    const double from = fl.number("from"), to = fl.number("to");
    const auto samples = fl.integer("samples");
    fl.finish();
    require(samples >= 2 && to > from, ErrorKind::config,
            "parameters.flux needs samples >= 2 and to > from");
    StrictObject tol(params.at("tolerances"), "parameters.tolerances");
    const double tol_period = tol.number("periodicity");
    const double tol_rate = tol.number("shift_rate");
    tol.finish();

    std::vector<double> flux;
    for (long long k = 0; k < samples; ++k)
        flux.push_back(from + (to - from) * static_cast<double>(k) / static_cast<double>(samples));
    const FluxSweep sw = ab_flux_sweep(c.setup, flux, c.probe);

    Csv csv({"k", "ef", "shift", "density_at_origin"});
    std::vector<double> origin;
    for (std::size_t k = 0; k < flux.size(); ++k) {
        const PatternResult& p = sw.patterns[k];
        origin.push_back(1 + p.visibility * std::cos(p.phase_offset));
        csv.row({static_cast<double>(k), flux[k], sw.shift[k], origin.back()});
    }
    double period = 0.0;
    int pairs = 0;
    const double step = (to - from) / static_cast<double>(samples);
    for (std::size_t i = 0; i < flux.size(); ++i)
        for (std::size_t j = i + 1; j < flux.size(); ++j) {
            if (std::abs(flux[j] - flux[i] - two_pi) > 1e-9 * step) continue;
            ++pairs;
            // shifts live on a circle of circumference d
            const double d = sw.patterns[i].d;
            period = std::max(period, std::abs(std::remainder(sw.shift[j] - sw.shift[i], d)));
            for (std::size_t x = 0; x < sw.patterns[i].density.size(); ++x)
                period = std::max(period, std::abs(sw.patterns[j].density[x] - sw.patterns[i].density[x]));
        }
    Report rep;
    if (pairs > 0) rep.at_most("period_2pi", period, tol_period);
    double rate = 0.0;
    const double expected = -c.setup.d_o / (c.setup.p * c.setup.d_s);
    for (const Fringe& f : sw.patterns[1].maxima_small_angle)
        for (const Fringe& g : sw.patterns[0].maxima_small_angle)
            if (f.n == g.n) rate = std::max(rate, std::abs((f.x - g.x) / (flux[1] - flux[0]) - expected));
    rep.at_most("shift_rate", rate, tol_rate);
    rep.results = {{"shift_rate", sw.shift_rate}, {"periodic_pairs", pairs}, {"samples", samples}};
    rep.csv.emplace_back("ab_sweep.csv", csv.str());
    return rep;
}

Report moments(const json& params) {
    StrictObject o(params, "parameters");
    const Mat g = matrix_from(params.at("g"), "parameters.g");
    (void)o.raw("g");
    const double mass = o.number("mass");
    require_positive(mass, "parameters.mass");
    const std::vector<double> etas = o.numbers("etas");
    require(!etas.empty(), ErrorKind::config, "parameters.etas must not be empty");
    for (double e : etas) require(e > 0, ErrorKind::config, "parameters.etas must be positive");
    StrictObject tol = o.object("tolerances");
    const double tol_closed = tol.number("closed_form");
    const double tol_extra = tol.number("extrapolated");
    tol.finish();
    o.finish();
    try {
        detail::require_positive_definite(g);
    } catch (const Error& e) {
        throw Error(ErrorKind::config, std::string("parameters.g: ") + e.what());
    }
    require(g.rows() <= 2, ErrorKind::config, "parameters.g: quadrature supports N <= 2");

    const int n = static_cast<int>(g.rows());
    std::vector<std::string> header{"eta", "re_Q", "im_Q"};
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            header.push_back("re_Q" + std::to_string(a + 1) + std::to_string(b + 1));
            header.push_back("im_Q" + std::to_string(a + 1) + std::to_string(b + 1));
        }
    Csv csv(header);
    auto row = [&](double eta, const MomentSet& s) {
        std::vector<double> r{eta, s.Q.real(), s.Q.imag()};
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                r.push_back(s.Q_mat(a, b).real());
                r.push_back(s.Q_mat(a, b).imag());
            }
        csv.row(r);
    };
    for (double e : etas) row(e, moments_quadrature_auto(g, mass, e));
    const MomentSet ex = moments_extrapolated(g, mass, etas);
    row(0.0, ex);

    const MomentSet closed = moments_closed_form(g, mass, 0.0);
    const CMat target = cplx(0.0, 0.5 / mass) * g.inverse().cast<cplx>();
    Report rep;
    rep.at_most("closed_form_Q", std::abs(closed.Q - 1.0), tol_closed);
    rep.at_most("closed_form_Q_vector", closed.Q_vec.cwiseAbs().maxCoeff(), tol_closed);
    rep.at_most("extrapolated_Q", std::abs(ex.Q - 1.0), tol_extra);
    rep.at_most("extrapolated_Q_vector", ex.Q_vec.cwiseAbs().maxCoeff(), tol_extra);
    rep.at_most("extrapolated_Q_matrix", (ex.Q_mat - target).cwiseAbs().maxCoeff(), tol_extra);
    rep.csv.emplace_back("moments.csv", csv.str());
    return rep;
}

Report hj_order(const json& params) {
    StrictObject o(params, "parameters");
    const ChartMetric m = metric_from(params.at("metric"), "parameters.metric");
    (void)o.raw("metric");
    const Point x = point_from(o, "point");
    const Vec dir = point_from(o, "direction");
    require(x.size() == m.dim && dir.size() == m.dim, ErrorKind::config,
            "parameters.point and parameters.direction need " + std::to_string(m.dim) + " entries");
    require(dir.norm() > 0, ErrorKind::config, "parameters.direction must be nonzero");
    const std::vector<double> sizes = o.numbers("sizes");
    require(sizes.size() >= 2, ErrorKind::config, "parameters.sizes needs at least two entries");
    for (double s : sizes) require(s > 0, ErrorKind::config, "parameters.sizes must be positive");
    const double eps = o.number("eps");
    require_positive(eps, "parameters.eps");
    const double mass = o.number("mass");
    require_positive(mass, "parameters.mass");
    const std::string variant = o.string("variant");
    require(variant == "selected" || variant == "printed", ErrorKind::config,
            "parameters.variant must be 'selected' or 'printed'");
    StrictObject tol = o.object("tolerances");
    const double tol_flat = tol.number("flat_residual");
    const double min_slope = tol.number("min_slope");
    tol.finish();
    o.finish();

    const ExpansionVariant v = variant == "selected" ? ExpansionVariant::selected() : ExpansionVariant::printed();
    const HJExpansion curved(m, x, mass, v);
    const HJExpansion flat(metrics::flat(m.dim), x, mass, v);
    const Vec u = dir.normalized();
    Csv csv({"xi", "residual", "flat_residual"});
    std::vector<double> res;
    double flat_worst = 0.0;
    for (double s : sizes) {
        res.push_back(hj_residual(curved, s * u, eps));
        const double fr = hj_residual(flat, s * u, eps);
        flat_worst = std::max(flat_worst, fr);
        csv.row({s, res.back(), fr});
    }
    Report rep;
    rep.at_most("flat_residual", flat_worst, tol_flat);
    rep.at_least("loglog_slope", loglog_slope(sizes, res), min_slope);
    rep.csv.emplace_back("hj_order.csv", csv.str());
    return rep;
}

Report kg_verify(const json& params) {
    StrictObject o(params, "parameters");
    const Vec k = point_from(o, "k");
    require(k.size() >= 1 && k.size() <= 2, ErrorKind::config, "parameters.k needs one or two entries");
    const double mass = o.number("mass");
    require(mass >= 0, ErrorKind::config, "parameters.mass must be >= 0");
    const double on_shell = std::sqrt(k.squaredNorm() + mass * mass);
    const double omega = params.at("omega").is_null() ? on_shell : o.number("omega");
    (void)o.raw("omega");
    const std::vector<double> hs = o.numbers("h");
    require(hs.size() >= 2, ErrorKind::config, "parameters.h needs at least two steps");
    for (std::size_t i = 0; i < hs.size(); ++i)
        require(hs[i] > 0 && (i == 0 || hs[i] < hs[i - 1]), ErrorKind::config,
                "parameters.h must be positive and decreasing");
    const auto n = o.integer("n");
    require(n >= 3, ErrorKind::config, "parameters.n must be >= 3");
    StrictObject tol = o.object("tolerances");
    const double tol_ratio = tol.number("ratio");
    const double tol_gap = tol.number("off_shell");
    tol.finish();
    o.finish();

    const double gap = std::abs(omega * omega - k.squaredNorm() - mass * mass);
    Csv csv({"h", "residual"});
    std::vector<double> res;
    for (double h : hs) {
        res.push_back(plane_wave_residual(k, omega, mass, {h, static_cast<int>(n)}));
        csv.row({h, res.back()});
    }
    Report rep;
    if (gap <= 1e-12 * std::max(1.0, omega * omega)) {
        double worst = 0.0;
        for (std::size_t i = 1; i < res.size(); ++i) {
            const double expected = std::pow(hs[i - 1] / hs[i], 2);
            worst = std::max(worst, std::abs(res[i - 1] / res[i] / expected - 1));
        }
        rep.at_most("second_order_ratio", worst, tol_ratio);
    } else {
        rep.at_most("off_shell_gap", std::abs(res.back() - gap) / gap, tol_gap);
    }
    rep.results = {{"omega", omega}, {"mass_shell_gap", gap}};
    rep.csv.emplace_back("kg_verify.csv", csv.str());
    return rep;
}

Report kernel_consistency_run(const json& params) {
    StrictObject o(params, "parameters");
    const ChartMetric m = metric_from(params.at("metric"), "parameters.metric");
    (void)o.raw("metric");
    require(m.dim == 1, ErrorKind::config, "parameters.metric must be one-dimensional");
    const auto n = o.integer("n");
    require(n >= 8, ErrorKind::config, "parameters.n must be >= 8");
    const double length = o.number("length");
    require_positive(length, "parameters.length");
    const double mass = o.number("mass");
    require_positive(mass, "parameters.mass");
    const std::vector<double> epss = o.numbers("eps");
    require(epss.size() >= 2, ErrorKind::config, "parameters.eps needs at least two values");
    for (double e : epss) require(e > 0, ErrorKind::config, "parameters.eps must be positive");
    const double eta_ratio = o.number("eta_ratio");
    require_positive(eta_ratio, "parameters.eta_ratio");
    struct Mode {
        double k;
        cplx c, s;
    };
    std::vector<Mode> modes;
    const json& field = params.at("field");
    require(field.is_array() && !field.empty(), ErrorKind::config, "parameters.field must be a non-empty array");
    for (std::size_t i = 0; i < field.size(); ++i) {
        StrictObject fo(field[i], "parameters.field[" + std::to_string(i) + "]");
        const double k = fo.number("k");
        const std::vector<double> c = fo.numbers("cos"), s = fo.numbers("sin");
        require(c.size() == 2 && s.size() == 2, ErrorKind::config,
                fo.field("cos") + " and " + fo.field("sin") + " must be [re, im]");
        fo.finish();
        modes.push_back({k, {c[0], c[1]}, {s[0], s[1]}});
    }
    (void)o.raw("field");
    StrictObject tol = o.object("tolerances");
    const double tol_rel = tol.number("relative");
    const double min_order = tol.number("min_order");
    tol.finish();
    o.finish();

    Csv csv({"eps", "relative"});
    std::vector<double> rel;
    for (double eps : epss) {
        WaveField f = WaveField::ring(m, 0.0, length, static_cast<int>(n));
        f.fill([&](const Point& x) {
            cplx v = 0;
            for (const Mode& md : modes) {
                const double arg = two_pi * md.k * x(0) / length;
                v += md.c * std::cos(arg) + md.s * std::sin(arg);
            }
            return v;
        });
        rel.push_back(kernel_consistency(f, mass, eps, eta_ratio * eps));
        csv.row({eps, rel.back()});
    }
    std::size_t smallest = 0;
    for (std::size_t i = 1; i < epss.size(); ++i)
        if (epss[i] < epss[smallest]) smallest = i;
    Report rep;
    rep.at_most("relative_gap_at_smallest_eps", rel[smallest], tol_rel);
    rep.at_least("fitted_order", loglog_slope(epss, rel), min_order);
    rep.csv.emplace_back("kernel_consistency.csv", csv.str());
    return rep;
}

// ---------------------------------------------------------------------------

struct Experiment {
    json defaults;
    std::function<Report(const json&)> run;
    std::string seed_key; ///< json pointer receiving --seed, empty if unseeded
};

const std::map<std::string, Experiment>& experiments() {
    static const std::map<std::string, Experiment> table{
        {"geometry-check",
         {{{"metric", "sphere:2"},
           {"points", 100},
           {"seed", std::uint64_t{0}},
           {"box", nullptr},
           {"expected_R", nullptr},
           {"tolerances", {{"ricci_fd", 1e-5}, {"expected_R", 1e-9}}}},
          geometry_check,
          "/seed"}},
        {"extremal",
         {{{"metric", "sphere:1"},
           {"mass", 1.0},
           {"charge", 0.0},
           {"potential", nullptr},
           {"x", {1.0, 0.0}},
           {"y", {1.5, 1.1}},
           {"tau_span", 1.0},
           {"nodes", 65},
           {"max_iterations", 200},
           {"sigma_x", 0.0},
           {"sigma_y", 0.0},
           {"tolerances", {{"residual", 1e-10}, {"phase", 1e-6}}}},
          extremal,
          ""}},
        {"double-slit",
         {{{"d_s", 1.0},
           {"d_o", 200.0},
           {"p", 10.0},
           {"sigma_i", 0.0},
           {"sigma_f", 0.0},
           {"flux_ef", 0.0},
           {"p_ph", 0.0},
           {"delta_p", nullptr},
           {"screen", {{"half_width", nullptr}, {"samples", 2048}}},
           {"mc", nullptr},
           {"mc_orders", 3},
           {"tolerances", {{"spacing_law", 1e-9}, {"maxima_phase", 1e-9}, {"mc_mode_bins", 1.0}}}},
          double_slit,
          "/mc/seed"}},
        {"ab-sweep",
         {{{"d_s", 1.0},
           {"d_o", 200.0},
           {"p", 10.0},
           {"sigma_i", 0.0},
           {"sigma_f", 0.0},
           {"p_ph", 0.0},
           {"delta_p", nullptr},
           {"screen", {{"half_width", nullptr}, {"samples", 2048}}},
           {"flux", {{"from", 0.0}, {"to", four_pi}, {"samples", 64}}},
           {"tolerances", {{"periodicity", 1e-12}, {"shift_rate", 1e-9}}}},
          ab_sweep,
          ""}},
        {"moments",
         {{{"g", {{1.0, 0.0}, {0.0, 4.0}}},
           {"mass", 1.0},
           {"etas", {0.3, 0.2, 0.1, 0.05}},
           {"tolerances", {{"closed_form", 0.0}, {"extrapolated", 1e-3}}}},
          moments,
          ""}},
        {"hj-order",
         {{{"metric", "sphere:2"},
           {"point", {1.0, 0.2}},
           {"direction", {0.6, 0.8}},
           {"sizes", {0.02, 0.04, 0.08}},
           {"eps", 0.1},
           {"mass", 1.0},
           {"variant", "selected"},
           {"tolerances", {{"flat_residual", 1e-10}, {"min_slope", 2.8}}}},
          hj_order,
          ""}},
        {"kg-verify",
         {{{"k", {1.0, 0.5}},
           {"mass", 1.0},
           {"omega", nullptr},
           {"h", {0.02, 0.01}},
           {"n", 5},
           {"tolerances", {{"ratio", 0.1}, {"off_shell", 1e-3}}}},
          kg_verify,
          ""}},
        {"kernel-consistency",
         {{{"metric", "ring-warp:0.1"},
           {"n", 512},
           {"length", two_pi},
           {"mass", 1.0},
           {"eps", {0.02, 0.01, 0.005}},
           {"eta_ratio", 0.1},
           {"field",
            json::array({{{"k", 1}, {"cos", {1.0, 0.2}}, {"sin", {0.0, 0.0}}},
                         {{"k", 2}, {"cos", {0.0, 0.0}}, {"sin", {0.3, 0.0}}}})},
           {"tolerances", {{"relative", 0.05}, {"min_order", 1.0}}}},
          kernel_consistency_run,
          ""}},
    };
    return table;
}

/// Full config with defaults filled in.
json resolve(const std::string& name, const std::optional<json>& user,
             const std::optional<std::string>& out_dir, const std::optional<std::uint64_t>& seed) {
    const Experiment& ex = experiments().at(name);
    json cfg = {{"schema_version", 1},
                {"experiment", name},
                {"parameters", ex.defaults},
                {"output", {{"directory", "out/" + name}, {"formats", {"json", "csv"}}}}};
    if (user) {
        require(user->is_object(), ErrorKind::config, "config must be a JSON object");
        for (auto it = user->begin(); it != user->end(); ++it)
            require(cfg.contains(it.key()), ErrorKind::config, "unknown field " + it.key());
        require(user->contains("schema_version"), ErrorKind::config, "missing field schema_version");
        const json& v = user->at("schema_version");
        require(v.is_number_integer() && v.get<long long>() == 1, ErrorKind::config,
                "schema_version must be 1");
        if (user->contains("experiment")) {
            const json& e = user->at("experiment");
            require(e.is_string() && e.get<std::string>() == name, ErrorKind::config,
                    "experiment must match the subcommand '" + name + "'");
        }
        if (user->contains("parameters"))
            cfg["parameters"] = merge_strict(ex.defaults, user->at("parameters"), "parameters");
        if (user->contains("output")) cfg["output"] = merge_strict(cfg["output"], user->at("output"), "output");
    }
    if (out_dir) cfg["output"]["directory"] = *out_dir;
    if (seed) {
        if (ex.seed_key.empty()) {
            std::cerr << "note: " << name << " is deterministic; --seed ignored\n";
        } else {
            const json::json_pointer ptr(ex.seed_key);
            // a seed only makes sense once the sampler is configured
            if (ptr.parent_pointer().empty() || !cfg["parameters"][ptr.parent_pointer()].is_null())
                cfg["parameters"][ptr] = *seed;
            else
                std::cerr << "note: no sampler configured; --seed ignored\n";
        }
    }
    const json& out = cfg["output"];
    require(out["directory"].is_string() && !out["directory"].get<std::string>().empty(), ErrorKind::config,
            "output.directory must be a non-empty string");
    require(out["formats"].is_array(), ErrorKind::config, "output.formats must be an array");
    for (const json& f : out["formats"])
        require(f == "json" || f == "csv", ErrorKind::config, "output.formats entries must be 'json' or 'csv'");
    return cfg;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    os << content;
    require(static_cast<bool>(os), ErrorKind::config, "cannot write " + p.string());
}

int run(const std::string& name, const std::optional<std::string>& config_path,
        const std::optional<std::string>& out_dir, const std::optional<std::uint64_t>& seed, bool dry) {
    std::optional<json> user;
    if (config_path) {
        std::ifstream is(*config_path);
        require(static_cast<bool>(is), ErrorKind::config, "cannot open config '" + *config_path + "'");
        try {
            user = json::parse(is);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::config, "config '" + *config_path + "' is not valid JSON: " + e.what());
        }
    }
    const json cfg = resolve(name, user, out_dir, seed);
    if (dry) {
        std::cout << cfg.dump(2) << '\n';
        return 0;
    }
    const Report rep = experiments().at(name).run(cfg["parameters"]);

    bool all = true;
    json checks = json::array();
    for (const Check& c : rep.checks) {
        all = all && c.pass;
        checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
        std::printf("%s %s value=%.6g tolerance=%.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                    c.tolerance);
    }
    const std::filesystem::path dir = cfg["output"]["directory"].get<std::string>();
    std::filesystem::create_directories(dir);
    const json& formats = cfg["output"]["formats"];
    auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
    if (wants("json")) {
        const json summary = {{"experiment", name}, {"params", cfg["parameters"]}, {"checks", checks},
                              {"results", rep.results}};
        std::string stem = name;
        std::replace(stem.begin(), stem.end(), '-', '_');
        write_file(dir / (stem + "_summary.json"), summary.dump(2) + "\n");
    }
    if (wants("csv"))
        for (const auto& [file, content] : rep.csv) write_file(dir / file, content);
    return all ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curved-space path and gauge experiments"};
    app.require_subcommand(1);
    std::string config, out;
    std::uint64_t seed = 0;
    bool dry = false;
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const auto& [name, ex] : experiments()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config, "JSON config file");
        sub->add_option("--out", out, "output directory (overrides output.directory)");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->add_flag("--dry-run", dry, "validate and print the resolved config");
        subs.emplace_back(name, sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    for (const auto& [name, sub] : subs) {
        if (!sub->parsed()) continue;
        auto given = [&](const char* opt) { return sub->count(opt) > 0; };
        try {
            return run(name, given("--config") ? std::optional(config) : std::nullopt,
                       given("--out") ? std::optional(out) : std::nullopt,
                       given("--seed") ? std::optional(seed) : std::nullopt, dry);
        } catch (const ConvergenceError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return e.kind() == ErrorKind::convergence_failure ? 2 : 1;
        } catch (const json::exception& e) {
            std::cerr << "error: config: " << e.what() << '\n';
            return 1;
        } catch (const std::filesystem::filesystem_error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return 1;
}
