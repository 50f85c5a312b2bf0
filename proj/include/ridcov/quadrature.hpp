#pragma once

// Adaptive Gauss-Kronrod (G7/K15) integration on a finite interval.
// The interval with the largest error estimate is bisected first until the
// summed estimate meets the tolerance or the subdivision budget runs out.

#include <functional>

namespace ridcov {

struct QuadratureConfig {
    double relative_tolerance = 1e-8;
    double absolute_tolerance = 1e-10;
    int max_subdivisions = 2000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;
};

// Integrates f over [a, b].  Throws ConvergenceError (carrying the best value
// and its error bound) when the tolerance is not reached within the budget.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureConfig& config = {});

} // namespace ridcov
