// Short-time kernel step on a warped ring against the Schrodinger operator
// with its curvature term, then the residual order of the local action.
#include <cstdio>

#include "gaugeqm/gaugeqm.hpp"

using namespace gaugeqm;

int main() {
    const ChartMetric ring = metrics::ring_warp(0.1);
    std::vector<double> epss, rel;
    for (double eps : {0.02, 0.01, 0.005}) {
        WaveField f = WaveField::ring(ring, 0.0, two_pi, 512);
        f.fill([](const Point& x) { return cplx(1.0, 0.2) * std::cos(x(0)) + 0.3 * std::sin(2 * x(0)); });
        epss.push_back(eps);
        rel.push_back(kernel_consistency(f, 1.0, eps, 0.1 * eps));
        std::printf("eps %.4f  relative gap %.3e\n", eps, rel.back());
    }
    std::printf("fitted order %.3f\n", loglog_slope(epss, rel));

    Point x(2);
    x << 1.0, 0.2;
    Vec u(2);
    u << 0.6, 0.8;
    for (auto [label, v] : {std::pair{"selected", ExpansionVariant::selected()},
                            std::pair{"printed", ExpansionVariant::printed()}}) {
        const HJExpansion e(metrics::sphere(2.0), x, 1.0, v);
        std::vector<double> sizes{0.02, 0.04, 0.08}, res;
        for (double h : sizes) res.push_back(hj_residual(e, h * u, 0.1));
        std::printf("%s quartic form: residual order %.2f\n", label, loglog_slope(sizes, res));
    }
}
