#pragma once

// Random chord generation under the two sampling assumptions and empirical
// estimation of the expected coverage proportion, with a sweep harness that
// puts analytic and Monte Carlo values side by side.

#include "ridcov/expectation.hpp"
#include "ridcov/geometry.hpp"
#include "ridcov/quadrature.hpp"
#include "ridcov/rng.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ridcov {

struct McEstimate {
    double mean = 0.0;
    double std_dev = 0.0;
    double std_error = 0.0;
    std::uint64_t n_trials = 0;
};

// Chord with endpoint angles drawn independently and uniformly from [0, 2pi).
Chord sample_ude_chord(RngStream& rng, const CoverageGeometry& geom);

// Chord whose midpoint is uniform over the environment disk (radius r_e, via
// r = r_e sqrt(u)), oriented perpendicular to the center-midpoint ray.  A
// midpoint at the exact center takes a fixed diameter direction.
Chord sample_udm_chord(RngStream& rng, const CoverageGeometry& geom);

// Mean/std of the concentric coverage proportion over n_trials sampled
// chords.  Trial i draws from rng.substream(i), so results are independent
// of thread count; n_threads <= 1 runs serially.
McEstimate estimate_expected_coverage(ChordCase chord_case,
                                      const CoverageGeometry& geom,
                                      std::uint64_t n_trials,
                                      const RngStream& rng,
                                      int n_threads = 1);

struct SweepCell {
    ChordCase chord_case = ChordCase::UDE;
    double r_e = 0.0;
    double r_c = 0.0;
    double analytic = 0.0;
    bool analytic_ok = true;
    std::string analytic_note; // set when quadrature failed for this cell
    McEstimate mc;
    bool within_4se = false; // |analytic - mc.mean| <= 4 * mc.std_error
};

// Full grid of (case, r_e, r_c = fraction * r_e) cells.  The default
// arguments reproduce the five-radii by five-fractions verification table.
// Quadrature failures are recorded per cell; the sweep continues.
std::vector<SweepCell> verification_sweep(std::span<const double> r_e_grid,
                                          std::span<const double> rc_fractions,
                                          std::uint64_t n_trials,
                                          const RngStream& rng,
                                          const QuadratureConfig& quad = {},
                                          int n_threads = 1);

std::vector<double> default_r_e_grid();
std::vector<double> default_rc_fractions();

// CSV with columns case,r_e,r_c,analytic,mc_mean,mc_std,mc_stderr,n_trials;
// include_check_column appends within_4se as 1/0.
void write_sweep_csv(std::span<const SweepCell> cells, std::ostream& out,
                     bool include_check_column = false);

} // namespace ridcov
