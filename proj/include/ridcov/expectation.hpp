#pragma once

// Expected coverage proportion of a random chord under the two classical
// chord-sampling assumptions:
//
//   UDE: both endpoints uniform on the environment circle.
//   UDM: chord midpoint uniform over the environment disk.
//
// Both expectations depend on the radii only through rho = r_c / r_e.  They
// are evaluated by adaptive quadrature after a change of variables that
// removes the vertical tangents of the raw integrands at their endpoints.

#include "ridcov/geometry.hpp"
#include "ridcov/quadrature.hpp"

namespace ridcov {

enum class ChordCase { UDE, UDM };

const char* to_string(ChordCase c);

struct ExpectationResult {
    double value = 0.0;
    double estimated_quadrature_error = 0.0;
    ChordCase chord_case = ChordCase::UDE;
};

// Expected coverage for endpoint-sampled chords:
//   (1/2pi) * integral over b in [pi - 2 asin(rho), pi + 2 asin(rho)] of
//   sqrt((r_c^2 - r_e^2 g(b)) / (r_e^2 - r_e^2 g(b))) db,  g(b) = (1+cos b)/2.
// Evaluated after substituting b = pi + 2 asin(rho) u.  r_c == r_e returns
// exactly 1 without integrating.
ExpectationResult expected_coverage_ude(const CoverageGeometry& geom,
                                        const QuadratureConfig& quad = {});

// Expected coverage for midpoint-sampled chords:
//   integral over l in [0, r_c] of (2l/r_e^2) sqrt((r_c^2-l^2)/(r_e^2-l^2)) dl.
// Evaluated after substituting l = r_c sin(theta).  r_c == r_e returns 1.
ExpectationResult expected_coverage_udm(const CoverageGeometry& geom,
                                        const QuadratureConfig& quad = {});

ExpectationResult expected_coverage(ChordCase chord_case,
                                    const CoverageGeometry& geom,
                                    const QuadratureConfig& quad = {});

// Distribution of the midpoint distance for midpoint-sampled chords:
// F(l*) = (l*/r_e)^2 on [0, r_e], with density 2 l* / r_e^2.
double midpoint_distance_cdf(double ell_star, double r_e);
double midpoint_distance_pdf(double ell_star, double r_e);

// E[P_UDE] - E[P_UDM] at r_c = rho, r_e = 1 (the difference depends only on
// rho).  Defined as 0 at rho = 0 and rho = 1.
double expectation_difference(double rho, const QuadratureConfig& quad = {});

// Locates the sign change of expectation_difference by bisection on
// [rho_lo, rho_hi] (the endpoints must bracket a sign change) to an interval
// narrower than 1e-4.
double find_expectation_crossover(double rho_lo, double rho_hi,
                                  const QuadratureConfig& quad = {});

} // namespace ridcov
