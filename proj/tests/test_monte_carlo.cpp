#include "doctest.h"

#include "ridcov/monte_carlo.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

using ridcov::ChordCase;
using ridcov::CoverageGeometry;
using ridcov::estimate_expected_coverage;
using ridcov::McEstimate;
using ridcov::RngStream;
using ridcov::sample_ude_chord;
using ridcov::sample_udm_chord;

namespace {
const CoverageGeometry kUnit({0, 0}, 0.5, 1.0);
}

TEST_CASE("chord samplers are deterministic in the seed")
{
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 100; ++i) {
        const auto ca = sample_ude_chord(a, kUnit);
        const auto cb = sample_ude_chord(b, kUnit);
        CHECK(ca.alpha == cb.alpha);
        CHECK(ca.beta == cb.beta);
    }
    RngStream c(42, 8); // different stream, different draws
    bool any_differ = false;
    RngStream a2(42, 7);
    for (int i = 0; i < 10; ++i)
        any_differ |= (sample_ude_chord(c, kUnit).alpha != sample_ude_chord(a2, kUnit).alpha);
    CHECK(any_differ);
}

TEST_CASE("sampled chords land on the circle with consistent midpoints")
{
    RngStream rng(9, 0);
    const CoverageGeometry geom({3, -2}, 1.0, 2.5);
    for (int i = 0; i < 1000; ++i) {
        const auto c = (i % 2 == 0) ? sample_ude_chord(rng, geom)
                                    : sample_udm_chord(rng, geom);
        CHECK(ridcov::distance(c.endpoint_a, geom.center) == doctest::Approx(2.5).epsilon(1e-9));
        CHECK(ridcov::distance(c.endpoint_b, geom.center) == doctest::Approx(2.5).epsilon(1e-9));
        const ridcov::Point2 mid = 0.5 * (c.endpoint_a + c.endpoint_b);
        CHECK(ridcov::distance(mid, c.midpoint) <= 1e-9);
        CHECK(c.ell == doctest::Approx(ridcov::distance(mid, geom.center)).epsilon(1e-9));
        CHECK(c.ell <= 2.5);
    }
}

TEST_CASE("midpoint-sampled midpoint distances follow the quadratic law")
{
    RngStream rng(1234, 1);
    const double r_e = 2.0;
    const CoverageGeometry geom({0, 0}, 1.0, r_e);
    std::vector<double> ell;
    ell.reserve(100000);
    for (int i = 0; i < 100000; ++i)
        ell.push_back(sample_udm_chord(rng, geom).ell);

    const double ks = testsupport::ks_statistic(
        ell, [r_e](double x) { return ridcov::midpoint_distance_cdf(x, r_e); });
    CHECK(ks < 0.01);

    // under this law P(ell < r_e/2) = 1/4
    double below = 0.0;
    for (const double v : ell)
        if (v < r_e / 2.0)
            below += 1.0;
    CHECK(below / static_cast<double>(ell.size()) == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("endpoint-sampled midpoint distances follow the arccos law")
{
    RngStream rng(4321, 2);
    const double r_e = 2.0;
    const CoverageGeometry geom({0, 0}, 1.0, r_e);
    std::vector<double> ell_sq;
    ell_sq.reserve(100000);
    double below_half = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double ell = sample_ude_chord(rng, geom).ell;
        ell_sq.push_back(ell * ell);
        if (ell < r_e / 2.0)
            below_half += 1.0;
    }

    // with both endpoint angles uniform, ell^2 = r_e^2 (1 + cos(b)) / 2 for a
    // uniform angle gap b, so F(x) = 1 - arccos(2 x / r_e^2 - 1) / pi
    const double ks = testsupport::ks_statistic(ell_sq, [r_e](double x) {
        const double t = std::clamp(2.0 * x / (r_e * r_e) - 1.0, -1.0, 1.0);
        return 1.0 - std::acos(t) / std::numbers::pi;
    });
    CHECK(ks < 0.01);

    // endpoint sampling favors long chords: P(ell < r_e/2) = 1/3, not 1/4
    CHECK(below_half / 100000.0 == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("estimates agree with the closed forms within four standard errors")
{
    RngStream rng(777, 0);
    for (const double rho : {0.2, 0.5, 0.8}) {
        const CoverageGeometry geom({0, 0}, rho * 3.0, 3.0);
        const McEstimate ude =
            estimate_expected_coverage(ChordCase::UDE, geom, 200000, rng.substream(0));
        const McEstimate udm =
            estimate_expected_coverage(ChordCase::UDM, geom, 200000, rng.substream(1));
        CHECK(std::abs(ude.mean - testsupport::ude_closed_form(rho)) <= 4.0 * ude.std_error);
        CHECK(std::abs(udm.mean - testsupport::udm_closed_form(rho)) <= 4.0 * udm.std_error);
        CHECK(ude.std_error == doctest::Approx(ude.std_dev / std::sqrt(200000.0)));
        CHECK(ude.n_trials == 200000);
    }
}

TEST_CASE("matched radii cover every chord exactly")
{
    RngStream rng(5, 5);
    const CoverageGeometry geom({0, 0}, 2.0, 2.0);
    const McEstimate e = estimate_expected_coverage(ChordCase::UDE, geom, 5000, rng);
    CHECK(e.mean == 1.0);
    CHECK(e.std_dev == 0.0);
}

TEST_CASE("estimator input validation")
{
    RngStream rng(1, 1);
    CHECK_THROWS_AS(estimate_expected_coverage(ChordCase::UDE, kUnit, 0, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_expected_coverage(ChordCase::UDE, kUnit, 1, rng),
                    std::invalid_argument);
}

TEST_CASE("thread count does not change the estimate bits")
{
    RngStream rng(31337, 4);
    for (const ChordCase cc : {ChordCase::UDE, ChordCase::UDM}) {
        const McEstimate serial = estimate_expected_coverage(cc, kUnit, 50000, rng, 1);
        const McEstimate par4 = estimate_expected_coverage(cc, kUnit, 50000, rng, 4);
        const McEstimate par3 = estimate_expected_coverage(cc, kUnit, 50000, rng, 3);
        CHECK(serial.mean == par4.mean);
        CHECK(serial.std_dev == par4.std_dev);
        CHECK(serial.mean == par3.mean);
        CHECK(serial.std_dev == par3.std_dev);
    }
}

TEST_CASE("verification sweep covers the default grid and matches analytics")
{
    RngStream rng(2468, 0);
    const auto r_e_grid = ridcov::default_r_e_grid();
    const auto fractions = ridcov::default_rc_fractions();
    REQUIRE(r_e_grid.size() == 5);
    REQUIRE(fractions.size() == 5);

    const auto cells = ridcov::verification_sweep(r_e_grid, fractions, 20000, rng);
    REQUIRE(cells.size() == 50);

    int ude_cells = 0;
    for (const auto& cell : cells) {
        CHECK(cell.analytic_ok);
        CHECK(cell.within_4se);
        CHECK(std::abs(cell.analytic - cell.mc.mean) <= 4.0 * cell.mc.std_error + 1e-12);
        if (cell.chord_case == ChordCase::UDE)
            ++ude_cells;
        if (cell.r_c == cell.r_e) {
            // the fraction-1 column goes through the exact matched-radii branch
            CHECK(cell.analytic == 1.0);
            CHECK(cell.mc.mean == 1.0);
            CHECK(cell.mc.std_error == 0.0);
        }
    }
    CHECK(ude_cells == 25);

    // the expectation depends only on rho, so rows with equal fractions agree
    // across r_e up to Monte Carlo noise; analytic columns agree to 1e-9
    for (size_t i = 0; i < cells.size(); ++i) {
        for (size_t j = i + 1; j < cells.size(); ++j) {
            if (cells[i].chord_case == cells[j].chord_case &&
                std::abs(cells[i].r_c / cells[i].r_e - cells[j].r_c / cells[j].r_e) < 1e-12) {
                CHECK(std::abs(cells[i].analytic - cells[j].analytic) <= 1e-9);
            }
        }
    }
}

TEST_CASE("sweep CSV is stable and carries the check column on request")
{
    RngStream rng(135, 7);
    const std::vector<double> r_e{1.0, 2.0};
    const std::vector<double> fr{0.5, 1.0};
    const auto cells = ridcov::verification_sweep(r_e, fr, 2000, rng);

    std::ostringstream a;
    std::ostringstream b;
    ridcov::write_sweep_csv(cells, a);
    ridcov::write_sweep_csv(cells, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().substr(0, a.str().find('\n')) ==
          "case,r_e,r_c,analytic,mc_mean,mc_std,mc_stderr,n_trials");

    std::ostringstream c;
    ridcov::write_sweep_csv(cells, c, true);
    CHECK(c.str().substr(0, c.str().find('\n')) ==
          "case,r_e,r_c,analytic,mc_mean,mc_std,mc_stderr,n_trials,within_4se");
    // 8 cells + header
    int lines = 0;
    for (const char ch : c.str())
        if (ch == '\n')
            ++lines;
    CHECK(lines == 9);
}
