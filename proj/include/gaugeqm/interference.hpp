#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gaugeqm/config.hpp"
#include "gaugeqm/error.hpp"
#include "gaugeqm/linalg.hpp"

namespace gaugeqm {

/// Two-beam experiment in natural units (hbar = 1). Slit i sits at
/// transverse position -d_s/2, slit f at +d_s/2; the screen is a distance
/// d_o downstream.
struct TwoPathSetup {
    double d_s = 1.0;
    double d_o = 200.0;
    double p = 10.0;
    double sigma_i = 0.0;
    double sigma_f = 0.0;
    double flux_term = 0.0; ///< e f, radians
    std::optional<double> half_width; ///< default 4 d
    int samples = 2048;

    double delta_sigma() const { return sigma_i - sigma_f; }
    double fringe_spacing() const { return two_pi * d_o / (p * d_s); }
    double screen_half_width() const { return half_width.value_or(4.0 * fringe_spacing()); }

    void validate() const {
        require_positive(d_s, "d_s");
        require_positive(d_o, "d_o");
        require_positive(p, "p");
        require(samples >= 2, ErrorKind::config, "screen.samples must be >= 2");
        if (half_width) require_positive(*half_width, "screen.half_width");
    }

    /// Small-angle formulas assume d_o >> d_s.
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (d_s / d_o > 0.1) w.push_back("d_s/d_o > 0.1: small-angle estimates are unreliable");
        return w;
    }
};

/// Photon probe at the slits; the mean transferred momentum is p_ph / 2.
struct ScatterProbe {
    double p_ph = 0.0;
    double delta_p = 0.0;

    static ScatterProbe none() { return {}; }
    static ScatterProbe averaged(double p_ph) { return {p_ph, 0.5 * p_ph}; }
};

struct MeasurementImpact {
    double s = 0.0;       ///< beam shift at the screen
    double delta_S = 0.0; ///< action perturbation of the probed beam
    double visibility = 1.0;
    bool which_path = false;
};

struct Fringe {
    long n = 0;
    double x = 0.0;
};

struct PatternResult {
    std::vector<double> x_hat;
    std::vector<double> density;
    std::vector<Fringe> maxima;             ///< exact-geometry maxima of the density
    std::vector<Fringe> maxima_small_angle; ///< closed form, spaced exactly by d
    double d = 0.0;
    double s = 0.0;
    double delta_S = 0.0;
    double visibility = 1.0;
    bool which_path = false;
    double phase_offset = 0.0; ///< (sigma_i - sigma_f) + e f after the probe shift
};

enum class GeometryMode { exact, small_angle };

/// r_i - r_f for a screen point x_hat.
inline double path_length_difference(const TwoPathSetup& s, double x_hat,
                                      GeometryMode mode = GeometryMode::exact) {
    if (mode == GeometryMode::small_angle) return s.d_s * x_hat / s.d_o;
    const double a = x_hat + 0.5 * s.d_s;
    const double b = x_hat - 0.5 * s.d_s;
    // difference of square roots without cancellation
    const double ra = std::hypot(s.d_o, a);
    const double rb = std::hypot(s.d_o, b);
    return (a * a - b * b) / (ra + rb);
}

namespace detail {

/// Root of path_length_difference(x) = target; the function is strictly
/// increasing with range (-d_s, d_s).
inline std::optional<double> solve_length_difference(const TwoPathSetup& s, double target,
                                                     double guess) {
    if (std::abs(target) >= s.d_s) return std::nullopt;
    auto f = [&](double x) { return path_length_difference(s, x) - target; };
    double step = std::max(1.0, std::abs(guess)) * 1e-3 + s.d_o * 1e-6;
    double lo = guess, hi = guess;
    double flo = f(lo), fhi = flo;
    for (int k = 0; k < 200 && flo > 0; ++k) {
        lo -= step;
        step *= 2;
        flo = f(lo);
    }
    step = std::max(1.0, std::abs(guess)) * 1e-3 + s.d_o * 1e-6;
    for (int k = 0; k < 200 && fhi < 0; ++k) {
        hi += step;
        step *= 2;
        fhi = f(hi);
    }
    if (flo > 0 || fhi < 0) return std::nullopt;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline std::vector<Fringe> maxima_for_offset(const TwoPathSetup& s, double offset,
                                             GeometryMode mode) {
    const double hw = s.screen_half_width();
    const double k = s.p * s.d_s / s.d_o; // small-angle phase gradient
    const long n_lo = static_cast<long>(std::floor((offset - k * hw) / two_pi)) - 1;
    const long n_hi = static_cast<long>(std::ceil((offset + k * hw) / two_pi)) + 1;
    std::vector<Fringe> out;
    for (long n = n_lo; n <= n_hi; ++n) {
        const double target = (two_pi * static_cast<double>(n) - offset) / s.p;
        const double guess = s.d_o * target / s.d_s;
        std::optional<double> x =
            mode == GeometryMode::small_angle ? std::optional<double>(guess)
                                              : solve_length_difference(s, target, guess);
        if (x && std::abs(*x) <= hw) out.push_back({n, *x});
    }
    return out;
}

} // namespace detail

/// Screen positions where p dr + (sigma_i - sigma_f) + e f = 2 n pi, for
/// n in [n_min, n_max]; roots off the screen are omitted.
inline std::vector<Fringe> fringe_positions(const TwoPathSetup& s, long n_min, long n_max,
                                            GeometryMode mode = GeometryMode::exact) {
    s.validate();
    const double offset = s.delta_sigma() + s.flux_term;
    std::vector<Fringe> out;
    for (const Fringe& f : detail::maxima_for_offset(s, offset, mode))
        if (f.n >= n_min && f.n <= n_max) out.push_back(f);
    return out;
}

/// Probe estimates: shift s = d_o dp / p, action change dS = s dp / 2,
/// visibility max(0, 1 - 2 s / d), which-path when d_s p_ph >= 2 pi.
inline MeasurementImpact measurement_impact(const TwoPathSetup& s, const ScatterProbe& probe) {
    s.validate();
    require(probe.p_ph >= 0 && probe.delta_p >= 0, ErrorKind::config,
            "p_ph and delta_p must be >= 0");
    MeasurementImpact m;
    if (probe.p_ph == 0.0) return m;
    m.s = s.d_o * probe.delta_p / s.p;
    m.delta_S = 0.5 * m.s * probe.delta_p;
    m.visibility = std::max(0.0, 1.0 - 2.0 * m.s / s.fringe_spacing());
    // tolerance matches the rounding of the equivalent s >= d/2 test
    m.which_path = s.d_s * probe.p_ph >= two_pi * (1.0 - 1e-12);
    return m;
}

/// D(x) = 1 + V cos(p dr(x) + (sigma_i - sigma_f) + e f). The probe's dS
/// is applied to sigma_i (kappa'(x_i) = kappa(x_i) e^{i dS}).
inline PatternResult density_pattern(const TwoPathSetup& s,
                                     const ScatterProbe& probe = ScatterProbe::none()) {
    s.validate();
    const MeasurementImpact mi = measurement_impact(s, probe);
    PatternResult r;
    r.d = s.fringe_spacing();
    r.s = mi.s;
    r.delta_S = mi.delta_S;
    r.visibility = mi.visibility;
    r.which_path = mi.which_path;
    TwoPathSetup shifted = s;
    shifted.sigma_i -= mi.delta_S;
    r.phase_offset = shifted.delta_sigma() + shifted.flux_term;
    const double hw = s.screen_half_width();
    r.x_hat.resize(s.samples);
    r.density.resize(s.samples);
    for (int k = 0; k < s.samples; ++k) {
        const double x = -hw + 2.0 * hw * k / (s.samples - 1);
        r.x_hat[k] = x;
        r.density[k] =
            1.0 + r.visibility * std::cos(s.p * path_length_difference(s, x) + r.phase_offset);
    }
    r.maxima = detail::maxima_for_offset(shifted, r.phase_offset, GeometryMode::exact);
    r.maxima_small_angle =
        detail::maxima_for_offset(shifted, r.phase_offset, GeometryMode::small_angle);
    return r;
}

struct FluxSweep {
    std::vector<double> flux;
    std::vector<PatternResult> patterns;
    std::vector<double> shift; ///< small-angle shift of the fringe system, wrapped into [-d/2, d/2]
    double shift_rate = 0.0;   ///< d x_hat / d(e f) = -d_o / (p d_s)
};

inline FluxSweep ab_flux_sweep(const TwoPathSetup& s, const std::vector<double>& flux_values,
                               const ScatterProbe& probe = ScatterProbe::none()) {
    s.validate();
    FluxSweep out;
    out.shift_rate = -s.d_o / (s.p * s.d_s);
    for (double ef : flux_values) {
        TwoPathSetup t = s;
        t.flux_term = ef;
        out.flux.push_back(ef);
        out.patterns.push_back(density_pattern(t, probe));
        out.shift.push_back(out.shift_rate * std::remainder(ef, two_pi));
    }
    return out;
}

struct McSampler {
    double jitter_scale = 0.5;
    std::uint64_t samples = 100000;
    double tol_phase = 0.15;
    std::uint64_t seed = 0;
    std::optional<double> bin_width; ///< default d / 50
    unsigned workers = 0;            ///< 0: hardware concurrency
};

struct McHistogram {
    double x_min = 0.0;
    double bin_width = 0.0;
    std::vector<std::uint64_t> counts;
    std::vector<double> density; ///< counts normalised to unit mean
    std::uint64_t accepted = 0;

    double center(std::size_t k) const { return x_min + (static_cast<double>(k) + 0.5) * bin_width; }
};

namespace detail {

inline constexpr std::uint64_t mc_chunk = 4096;

inline void mc_chunk_counts(const TwoPathSetup& s, const McSampler& cfg, std::uint64_t chunk,
                            double hw, double bin, std::vector<std::uint64_t>& counts) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> screen(-hw, hw);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::uint64_t begin = chunk * mc_chunk;
    const std::uint64_t end = std::min(cfg.samples, begin + mc_chunk);
    const double offset = s.delta_sigma() + s.flux_term;
    auto branch = [&](double slit_y, double x_hat) {
        // slit (0, slit_y) -> jittered interior node -> screen (d_o, x_hat)
        const double mz = 0.5 * s.d_o + cfg.jitter_scale * gauss(rng);
        const double my = 0.5 * (slit_y + x_hat) + cfg.jitter_scale * gauss(rng);
        return std::hypot(mz, my - slit_y) + std::hypot(s.d_o - mz, x_hat - my);
    };
    for (std::uint64_t k = begin; k < end; ++k) {
        const double x = screen(rng);
        const double len_i = branch(-0.5 * s.d_s, x);
        const double len_f = branch(0.5 * s.d_s, x);
        // union slit_i -> x_hat -> slit_f: the second leg is traversed backwards
        const double phase = s.p * (len_i - len_f) + offset;
        if (std::abs(std::remainder(phase, two_pi)) < cfg.tol_phase) {
            const auto b = static_cast<std::size_t>((x + hw) / bin);
            if (b < counts.size()) ++counts[b];
        }
    }
}

} // namespace detail

/// Counting estimator: sample screen points, draw jittered two-segment
/// polylines through each slit, keep samples whose loop phase is within
/// tol of 2 pi Z. Chunk c always uses substream c and counts are integers,
/// so the result does not depend on the worker count.
inline McHistogram mc_density(const TwoPathSetup& s, const McSampler& cfg) {
    s.validate();
    require(cfg.samples > 0, ErrorKind::config, "mc.K must be > 0");
    require(cfg.jitter_scale >= 0, ErrorKind::config, "mc.jitter must be >= 0");
    require(cfg.tol_phase > 0 && cfg.tol_phase < pi, ErrorKind::config,
            "mc.tol must lie in (0, pi)");
    const double hw = s.screen_half_width();
    const double bin = cfg.bin_width.value_or(s.fringe_spacing() / 50.0);
    require(bin > 0, ErrorKind::config, "mc.bin_width must be > 0");
    const auto nbins = static_cast<std::size_t>(std::ceil(2.0 * hw / bin));
    const std::uint64_t chunks = (cfg.samples + detail::mc_chunk - 1) / detail::mc_chunk;
    unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));

    std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(nbins, 0));
    auto work = [&](unsigned w) {
        for (std::uint64_t c = w; c < chunks; c += workers)
            detail::mc_chunk_counts(s, cfg, c, hw, bin, partial[w]);
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    McHistogram h;
    h.x_min = -hw;
    h.bin_width = bin;
    h.counts.assign(nbins, 0);
    for (const auto& p : partial)
        for (std::size_t b = 0; b < nbins; ++b) h.counts[b] += p[b];
    for (auto c : h.counts) h.accepted += c;
    require(h.accepted > 0, ErrorKind::degenerate_statistics,
            "no sample was accepted anywhere on the screen");
    const double mean = static_cast<double>(h.accepted) / static_cast<double>(nbins);
    h.density.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b) h.density[b] = static_cast<double>(h.counts[b]) / mean;
    return h;
}

/// Peaks of a counting histogram: maximal runs of bins above `fraction` of
/// the tallest bin, each reported at its count-weighted centroid. Runs that
/// touch the screen edge are dropped as truncated.
inline std::vector<double> histogram_modes(const McHistogram& h, double fraction = 0.2) {
    std::uint64_t peak = 0;
    for (auto c : h.counts) peak = std::max(peak, c);
    const double cut = fraction * static_cast<double>(peak);
    std::vector<double> modes;
    std::size_t k = 0;
    const std::size_t n = h.counts.size();
    while (k < n) {
        if (static_cast<double>(h.counts[k]) <= cut) {
            ++k;
            continue;
        }
        const std::size_t start = k;
        double w = 0.0, wx = 0.0;
        while (k < n && static_cast<double>(h.counts[k]) > cut) {
            w += static_cast<double>(h.counts[k]);
            wx += static_cast<double>(h.counts[k]) * h.center(k);
            ++k;
        }
        if (start > 0 && k < n) modes.push_back(wx / w);
    }
    return modes;
}

/// Setup from {d_s, d_o, p, sigma_i, sigma_f, flux_ef, p_ph, delta_p,
/// screen:{half_width, samples}, mc:{...}}. Returns the probe alongside.
struct DoubleSlitConfig {
    TwoPathSetup setup;
    ScatterProbe probe;
    std::optional<McSampler> mc;
};

inline DoubleSlitConfig double_slit_from_json(StrictObject& o) {
    DoubleSlitConfig c;
    c.setup.d_s = o.number("d_s");
    c.setup.d_o = o.number("d_o");
    c.setup.p = o.number("p");
    require_positive(c.setup.d_s, o.field("d_s"));
    require_positive(c.setup.d_o, o.field("d_o"));
    require_positive(c.setup.p, o.field("p"));
    c.setup.sigma_i = o.number("sigma_i", 0.0);
    c.setup.sigma_f = o.number("sigma_f", 0.0);
    c.setup.flux_term = o.number("flux_ef", 0.0);
    const double p_ph = o.number("p_ph", 0.0);
    require(p_ph >= 0, ErrorKind::config, o.field("p_ph") + " must be >= 0");
    c.probe = ScatterProbe::averaged(p_ph);
    c.probe.delta_p = o.number("delta_p", c.probe.delta_p);
    require(c.probe.delta_p >= 0, ErrorKind::config, o.field("delta_p") + " must be >= 0");
    if (auto sc = o.optional_object("screen")) {
        if (sc->has("half_width")) {
            c.setup.half_width = sc->number("half_width");
            require_positive(*c.setup.half_width, sc->field("half_width"));
        }
        c.setup.samples = static_cast<int>(sc->integer("samples", 2048));
        require(c.setup.samples >= 2, ErrorKind::config, sc->field("samples") + " must be >= 2");
        sc->finish();
    }
    if (auto mc = o.optional_object("mc")) {
        McSampler m;
        m.samples = mc->unsigned_integer("K", m.samples);
        m.jitter_scale = mc->number("jitter", m.jitter_scale);
        m.tol_phase = mc->number("tol", m.tol_phase);
        m.seed = mc->unsigned_integer("seed", m.seed);
        if (mc->has("bin_width")) m.bin_width = mc->number("bin_width");
        m.workers = static_cast<unsigned>(mc->unsigned_integer("workers", 0));
        require(m.samples > 0, ErrorKind::config, mc->field("K") + " must be > 0");
        require(m.jitter_scale >= 0, ErrorKind::config, mc->field("jitter") + " must be >= 0");
        require(m.tol_phase > 0 && m.tol_phase < pi, ErrorKind::config,
                mc->field("tol") + " must lie in (0, pi)");
        mc->finish();
        c.mc = m;
    }
    return c;
}

inline nlohmann::json pattern_summary(const PatternResult& r) {
    nlohmann::json maxima = nlohmann::json::array();
    for (const auto& f : r.maxima) maxima.push_back(f.x);
    return {{"maxima", maxima},       {"d", r.d},
            {"s", r.s},               {"delta_S", r.delta_S},
            {"visibility", r.visibility}, {"which_path", r.which_path}};
}

} // namespace gaugeqm
