// Stationary path between two points of a sphere, its action, and the
// phase verdict for a constant gauge.
#include <cstdio>

#include "gaugeqm/gaugeqm.hpp"

using namespace gaugeqm;

int main() {
    const LagrangianSpec lag = LagrangianSpec::massive(metrics::sphere(1.0), 1.0);
    Point x(2), y(2);
    x << 1.0, 0.0;
    y << 1.5, 1.1;

    const ExtremalResult r = find_extremal_detailed(lag, x, y, 1.0, 65);
    const double s = action(r.path, lag);
    std::printf("iterations %d, residual %.3g\n", r.iterations, r.residual);
    std::printf("action %.12f\n", s);
    std::printf("Hamilton principal function %.12f\n", hamilton_principal_function(lag, x, y, 1.0));

    const PhaseVerdict v = physical_check(s, 0.25, 0.25);
    std::printf("n = %ld, residual phase %.6f, physical: %s\n", v.n, v.residual,
                v.is_physical ? "yes" : "no");
}
