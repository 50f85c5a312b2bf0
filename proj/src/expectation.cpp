#include "ridcov/expectation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ridcov {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

const char* to_string(ChordCase c)
{
    return c == ChordCase::UDE ? "UDE" : "UDM";
}

ExpectationResult expected_coverage_ude(const CoverageGeometry& geom,
                                        const QuadratureConfig& quad)
{
    if (geom.r_c == geom.r_e)
        return {1.0, 0.0, ChordCase::UDE};

    // Substituting b = pi + 2*asin(rho)*u maps the integration range to
    // u in [-1, 1] and reduces the integrand to sqrt(rho^2 - sin^2(cu))/cos(cu)
    // with c = asin(rho).  The square-root zeros at u = +-1 remain integrable
    // and the adaptive refinement resolves them.
    const double rho = geom.rho();
    const double c = std::asin(rho);
    const auto integrand = [rho, c](double u) {
        const double s = std::sin(c * u);
        const double num = std::max(0.0, rho * rho - s * s);
        return std::sqrt(num) / std::cos(c * u);
    };

    const QuadratureResult r = integrate_adaptive(integrand, -1.0, 1.0, quad);
    return {clamp01(c / kPi * r.value), c / kPi * r.error_estimate, ChordCase::UDE};
}

ExpectationResult expected_coverage_udm(const CoverageGeometry& geom,
                                        const QuadratureConfig& quad)
{
    if (geom.r_c == geom.r_e)
        return {1.0, 0.0, ChordCase::UDM};

    // Substituting l = r_c sin(theta) turns the integrand into
    // 2 rho^3 sin(theta) cos^2(theta) / sqrt(1 - rho^2 sin^2(theta)),
    // smooth on [0, pi/2] for rho < 1.
    const double rho = geom.rho();
    const auto integrand = [rho](double theta) {
        const double s = std::sin(theta);
        const double co = std::cos(theta);
        return 2.0 * rho * rho * rho * s * co * co /
               std::sqrt(1.0 - rho * rho * s * s);
    };

    const QuadratureResult r = integrate_adaptive(integrand, 0.0, kPi / 2.0, quad);
    return {clamp01(r.value), r.error_estimate, ChordCase::UDM};
}

ExpectationResult expected_coverage(ChordCase chord_case,
                                    const CoverageGeometry& geom,
                                    const QuadratureConfig& quad)
{
    return chord_case == ChordCase::UDE ? expected_coverage_ude(geom, quad)
                                        : expected_coverage_udm(geom, quad);
}

double midpoint_distance_cdf(double ell_star, double r_e)
{
    if (ell_star <= 0.0)
        return 0.0;
    if (ell_star >= r_e)
        return 1.0;
    return (ell_star * ell_star) / (r_e * r_e);
}

double midpoint_distance_pdf(double ell_star, double r_e)
{
    if (ell_star < 0.0 || ell_star > r_e)
        return 0.0;
    return 2.0 * ell_star / (r_e * r_e);
}

double expectation_difference(double rho, const QuadratureConfig& quad)
{
    if (!(rho >= 0.0) || rho > 1.0)
        throw std::invalid_argument("rho must lie in [0, 1]");
    if (rho == 0.0 || rho == 1.0)
        return 0.0;

    const CoverageGeometry geom({0.0, 0.0}, rho, 1.0);
    return expected_coverage_ude(geom, quad).value -
           expected_coverage_udm(geom, quad).value;
}

double find_expectation_crossover(double rho_lo, double rho_hi,
                                  const QuadratureConfig& quad)
{
    if (!(0.0 <= rho_lo) || !(rho_lo < rho_hi) || !(rho_hi <= 1.0))
        throw std::invalid_argument("need 0 <= rho_lo < rho_hi <= 1");

    double f_lo = expectation_difference(rho_lo, quad);
    double f_hi = expectation_difference(rho_hi, quad);
    if (f_lo == 0.0)
        return rho_lo;
    if (f_hi == 0.0)
        return rho_hi;
    if ((f_lo > 0.0) == (f_hi > 0.0))
        throw std::invalid_argument("bracket does not contain a sign change");

    while (rho_hi - rho_lo >= 1e-4) {
        const double mid = 0.5 * (rho_lo + rho_hi);
        const double f_mid = expectation_difference(mid, quad);
        if (f_mid == 0.0)
            return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            rho_lo = mid;
            f_lo = f_mid;
        } else {
            rho_hi = mid;
        }
    }
    return 0.5 * (rho_lo + rho_hi);
}

} // namespace ridcov
