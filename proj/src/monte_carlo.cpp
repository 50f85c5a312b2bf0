#include "ridcov/monte_carlo.hpp"

#include "ridcov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace ridcov {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Trials are accumulated per fixed-size chunk and the chunks merged in index
// order, so the estimate is bit-identical for any thread count.
constexpr std::uint64_t kChunkTrials = 8192;

struct Accumulator {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x)
    {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
};

Accumulator merge(const Accumulator& a, const Accumulator& b)
{
    if (a.n == 0)
        return b;
    if (b.n == 0)
        return a;
    Accumulator out;
    out.n = a.n + b.n;
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * static_cast<double>(b.n) / static_cast<double>(out.n);
    out.m2 = a.m2 + b.m2 +
             delta * delta * static_cast<double>(a.n) * static_cast<double>(b.n) /
                 static_cast<double>(out.n);
    return out;
}

double coverage_of(const Chord& chord, const CoverageGeometry& geom)
{
    if (chord.degenerate)
        return 0.0;
    return concentric_coverage_proportion(chord.ell, geom);
}

void append_field(std::string& line, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    line += buf;
}

} // namespace

Chord sample_ude_chord(RngStream& rng, const CoverageGeometry& geom)
{
    const double alpha = kTwoPi * rng.uniform01();
    const double beta = kTwoPi * rng.uniform01();
    return chord_from_angles(alpha, beta, geom);
}

Chord sample_udm_chord(RngStream& rng, const CoverageGeometry& geom)
{
    const double r = geom.r_e * std::sqrt(rng.uniform01());
    const double phi = kTwoPi * rng.uniform01();

    Chord c;
    if (r == 0.0) {
        // Measure-zero center hit: take the diameter along the x axis.
        c.endpoint_a = geom.center + Point2{geom.r_e, 0.0};
        c.endpoint_b = geom.center - Point2{geom.r_e, 0.0};
        c.alpha = 0.0;
        c.beta = std::numbers::pi;
    } else {
        const Point2 radial{std::cos(phi), std::sin(phi)};
        const Point2 tangent{-radial.y, radial.x};
        const double half = std::sqrt(std::max(0.0, geom.r_e * geom.r_e - r * r));
        const Point2 mid = geom.center + r * radial;
        c.endpoint_a = mid + half * tangent;
        c.endpoint_b = mid - half * tangent;
        const auto angle_of = [&](Point2 p) {
            double a = std::atan2(p.y - geom.center.y, p.x - geom.center.x);
            if (a < 0.0)
                a += kTwoPi;
            return a;
        };
        c.alpha = angle_of(c.endpoint_a);
        c.beta = angle_of(c.endpoint_b);
    }
    c.midpoint = 0.5 * (c.endpoint_a + c.endpoint_b);
    c.ell = std::min(distance(c.midpoint, geom.center), geom.r_e);
    c.degenerate = false;
    return c;
}

McEstimate estimate_expected_coverage(ChordCase chord_case,
                                      const CoverageGeometry& geom,
                                      std::uint64_t n_trials,
                                      const RngStream& rng,
                                      int n_threads)
{
    if (n_trials < 2)
        throw std::invalid_argument("need at least two trials");

    const std::uint64_t n_chunks = (n_trials + kChunkTrials - 1) / kChunkTrials;
    std::vector<Accumulator> chunks(n_chunks);

    const auto run_chunk = [&](std::uint64_t c) {
        Accumulator acc;
        const std::uint64_t begin = c * kChunkTrials;
        const std::uint64_t end = std::min(n_trials, begin + kChunkTrials);
        for (std::uint64_t i = begin; i < end; ++i) {
            RngStream trial_rng = rng.substream(i);
            const Chord chord = chord_case == ChordCase::UDE
                                    ? sample_ude_chord(trial_rng, geom)
                                    : sample_udm_chord(trial_rng, geom);
            acc.add(coverage_of(chord, geom));
        }
        chunks[c] = acc;
    };

    const int workers = std::max(1, n_threads);
    if (workers == 1 || n_chunks == 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c)
            run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (std::uint64_t c = t; c < n_chunks; c += workers)
                    run_chunk(c);
            });
        }
        for (auto& th : pool)
            th.join();
    }

    Accumulator total;
    for (const Accumulator& acc : chunks)
        total = merge(total, acc);

    McEstimate est;
    est.n_trials = total.n;
    est.mean = total.mean;
    est.std_dev = std::sqrt(std::max(0.0, total.m2 / static_cast<double>(total.n - 1)));
    est.std_error = est.std_dev / std::sqrt(static_cast<double>(total.n));
    return est;
}

std::vector<double> default_r_e_grid() { return {0.1, 1.0, 1.5, 2.0, 2.5}; }

std::vector<double> default_rc_fractions() { return {0.2, 0.4, 0.6, 0.8, 1.0}; }

std::vector<SweepCell> verification_sweep(std::span<const double> r_e_grid,
                                          std::span<const double> rc_fractions,
                                          std::uint64_t n_trials,
                                          const RngStream& rng,
                                          const QuadratureConfig& quad,
                                          int n_threads)
{
    if (r_e_grid.empty() || rc_fractions.empty())
        throw std::invalid_argument("sweep grids must be non-empty");

    std::vector<SweepCell> cells;
    cells.reserve(2 * r_e_grid.size() * rc_fractions.size());

    std::uint64_t cell_index = 0;
    for (const ChordCase chord_case : {ChordCase::UDE, ChordCase::UDM}) {
        for (const double r_e : r_e_grid) {
            for (const double fraction : rc_fractions) {
                SweepCell cell;
                cell.chord_case = chord_case;
                cell.r_e = r_e;
                cell.r_c = fraction * r_e;

                const CoverageGeometry geom({0.0, 0.0}, cell.r_c, cell.r_e);
                try {
                    cell.analytic = expected_coverage(chord_case, geom, quad).value;
                } catch (const ConvergenceError& e) {
                    cell.analytic_ok = false;
                    cell.analytic = e.best_value();
                    cell.analytic_note = e.what();
                }

                cell.mc = estimate_expected_coverage(chord_case, geom, n_trials,
                                                     rng.substream(cell_index),
                                                     n_threads);
                cell.within_4se =
                    cell.analytic_ok &&
                    std::abs(cell.analytic - cell.mc.mean) <= 4.0 * cell.mc.std_error;

                cells.push_back(cell);
                ++cell_index;
            }
        }
    }
    return cells;
}

void write_sweep_csv(std::span<const SweepCell> cells, std::ostream& out,
                     bool include_check_column)
{
    out << "case,r_e,r_c,analytic,mc_mean,mc_std,mc_stderr,n_trials";
    if (include_check_column)
        out << ",within_4se";
    out << "\n";

    for (const SweepCell& cell : cells) {
        std::string line = to_string(cell.chord_case);
        line += ',';
        append_field(line, cell.r_e);
        line += ',';
        append_field(line, cell.r_c);
        line += ',';
        append_field(line, cell.analytic);
        line += ',';
        append_field(line, cell.mc.mean);
        line += ',';
        append_field(line, cell.mc.std_dev);
        line += ',';
        append_field(line, cell.mc.std_error);
        line += ',';
        line += std::to_string(cell.mc.n_trials);
        if (include_check_column) {
            line += ',';
            line += cell.within_4se ? '1' : '0';
        }
        out << line << "\n";
    }
}

} // namespace ridcov
