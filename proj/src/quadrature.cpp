#include "ridcov/quadrature.hpp"

#include "ridcov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace ridcov {

namespace {

// 15-point Kronrod extension of 7-point Gauss, positive abscissae.
// Odd-indexed abscissae are the embedded Gauss nodes.
constexpr double kAbscissae[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0,
};

constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
};

constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
};

struct IntervalEstimate {
    double a, b;
    double kronrod;
    double error;

    bool operator<(const IntervalEstimate& other) const { return error < other.error; }
};

IntervalEstimate evaluate_gk15(const std::function<double(double)>& f, double a, double b)
{
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double gauss = kGaussWeights[3] * f(mid);
    double kronrod = kKronrodWeights[7] * f(mid);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kAbscissae[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        kronrod += kKronrodWeights[i] * fsum;
        if (i % 2 == 1)
            gauss += kGaussWeights[i / 2] * fsum;
    }
    gauss *= half;
    kronrod *= half;

    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

} // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureConfig& config)
{
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integration bounds must be finite");
    if (config.relative_tolerance <= 0.0 && config.absolute_tolerance <= 0.0)
        throw std::invalid_argument("at least one tolerance must be positive");
    if (a == b)
        return {0.0, 0.0, 0};

    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }

    std::priority_queue<IntervalEstimate> queue;
    queue.push(evaluate_gk15(f, a, b));
    double value = queue.top().kronrod;
    double error = queue.top().error;

    int subdivisions = 0;
    while (error > std::max(config.absolute_tolerance,
                            config.relative_tolerance * std::abs(value))) {
        if (subdivisions >= config.max_subdivisions)
            throw ConvergenceError("quadrature did not converge after " +
                                       std::to_string(subdivisions) + " subdivisions",
                                   sign * value, error);

        const IntervalEstimate worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const IntervalEstimate left = evaluate_gk15(f, worst.a, mid);
        const IntervalEstimate right = evaluate_gk15(f, mid, worst.b);

        value += left.kronrod + right.kronrod - worst.kronrod;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++subdivisions;
    }

    if (!std::isfinite(value))
        throw ConvergenceError("quadrature produced a non-finite value", sign * value, error);

    return {sign * value, error, subdivisions};
}

} // namespace ridcov
