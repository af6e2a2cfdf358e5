// Fringe positions for the two-beam setup, with and without a photon probe
// and with half a flux quantum through the solenoid.
#include <cstdio>

#include "gaugeqm/gaugeqm.hpp"

using namespace gaugeqm;

namespace {

void show(const char* label, const TwoPathSetup& s, const ScatterProbe& probe) {
    const PatternResult r = density_pattern(s, probe);
    std::printf("%s: visibility %.3f, which-path %s\n", label, r.visibility, r.which_path ? "yes" : "no");
    std::printf("  exact maxima:");
    for (const Fringe& f : r.maxima) std::printf(" %.3f", f.x);
    std::printf("\n  small-angle maxima:");
    for (const Fringe& f : r.maxima_small_angle) std::printf(" %.3f", f.x);
    std::printf("\n");
}

} // namespace

int main() {
    TwoPathSetup s; // d_s 1, d_o 200, p 10
    std::printf("fringe spacing d = %.6f\n", s.fringe_spacing());
    show("bare", s, ScatterProbe::none());
    show("probe p_ph = 2", s, ScatterProbe::averaged(2.0));
    show("probe p_ph = 2 pi", s, ScatterProbe::averaged(two_pi));

    TwoPathSetup half = s;
    half.flux_term = pi;
    show("flux e f = pi", half, ScatterProbe::none());
}
