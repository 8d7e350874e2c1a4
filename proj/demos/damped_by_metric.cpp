// An exponentially growing metric g(t) = e^{2t} turns the free particle into
// a damped one: the derived equation of motion is x'' + 2x' = 0. Integrates
// the system and prints the deviation from the closed form (1 - e^{-2s})/2.

#include <cstdio>

#include "tdmech/dynamics.hpp"
#include "tdmech/riemann.hpp"

using namespace tdmech;

int main() {
    MetricField g(1, Box::cube(2, -10.0, 10.0), [](const auto& t, auto, auto out) {
        out[0] = exp(2.0 * t);
    });
    TimeLagrangian L = time_metric_lagrangian(g);
    SemisprayField spray = lagrangian_spray(L);

    IntegratorConfig cfg;
    cfg.h = 1e-3;
    cfg.s1 = 2.0;
    Trajectory tr = integrate(spray, 0.0, Vec::Zero(1), Vec::Constant(1, 1.0), cfg);

    std::printf("# s        x(s)            closed form     error\n");
    for (std::size_t i = 0; i < tr.samples.size(); i += 250) {
        double s = tr.samples[i].s;
        double x = tr.samples[i].x(0);
        double exact = 0.5 * (1.0 - std::exp(-2.0 * s));
        std::printf("%.3f  %.12f  %.12f  %.3e\n", s, x, exact, std::abs(x - exact));
    }
    std::printf("# max Euler-Lagrange audit residual: %.3e\n", el_residual(L, tr).max_abs);
    return 0;
}
