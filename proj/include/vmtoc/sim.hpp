#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vmtoc/control.hpp"
#include "vmtoc/maps.hpp"
#include "vmtoc/stability.hpp"

namespace vmtoc {

struct SimConfig {
    Point2d initial{0.3, 0.1};
    std::size_t steps = 2000;
    std::uint64_t seed = 0;
    double conv_tol = 1e-9;
    std::size_t conv_window = 50;
    double escape_bound = 1e8;
    std::size_t transient = 500;
    std::size_t record_tail = 200;
    std::size_t period_max = 16;
    double period_tol = 1e-6;
    /// Stop as soon as the convergence window is met. Sweeps and limit sets
    /// turn this off so every cell yields a full tail.
    bool stop_early = true;
    /// Worker cap for sweeps and Monte Carlo; 0 = hardware concurrency.
    /// Results do not depend on it.
    unsigned threads = 0;
};

void validate(const SimConfig& cfg);

namespace outcome {
struct Converged {
    std::size_t at_step = 0;
};
struct Periodic {
    std::size_t period = 0;
};
struct Bounded {};
struct Escaped {
    std::size_t at_step = 0;
};
} // namespace outcome

using Outcome = std::variant<outcome::Converged, outcome::Periodic, outcome::Bounded, outcome::Escaped>;

std::string to_string(const Outcome& o);
bool is_converged(const Outcome& o);
/// Period of a Periodic outcome, 0 otherwise.
std::size_t period_of(const Outcome& o);

/// points[0] is the initial state; controls[n] produced points[n + 1].
struct Trajectory {
    std::vector<Point2d> points;
    std::vector<std::pair<double, double>> controls;
    Outcome outcome = outcome::Bounded{};
};

/// Runs the controlled map from cfg.initial using stream trial_stream(cfg.seed, 0).
Trajectory run_trajectory(const MapParamsd& params, Branch branch, const ControlSchedule& schedule,
                          const SimConfig& cfg);

/// Same, with an explicit initial state and noise stream.
Trajectory run_trajectory(const MapParamsd& params, Branch branch, const ControlSchedule& schedule,
                          const SimConfig& cfg, const Point2d& initial, RngState stream);

Outcome classify_tail(const Trajectory& traj, const Point2d& target, const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepSpec {
    MapParamsd params;
    Branch branch = Branch::Plus;
    double alpha_lo = 0.0;
    double alpha_hi = 0.9;
    std::size_t n_alpha = 200;
    double ell1 = 0.0;
    NoiseDist dist1 = NoiseDist::BernoulliPM1;
    ControlChannel ch2;
    bool allow_overshoot = false;
    std::vector<Point2d> inits;
};

struct SweepCell {
    std::size_t alpha_index = 0;
    std::size_t init_index = 0;
    double alpha = 0.0;
    Outcome outcome = outcome::Bounded{};
    std::size_t first = 0; ///< offset into SweepResult::points
    std::size_t count = 0;
    std::string error;     ///< non-empty when the cell could not run
};

struct SweepResult {
    std::vector<std::pair<double, double>> points; ///< (alpha, x)
    std::vector<SweepCell> cells;
    std::size_t escaped = 0;
    std::size_t failed = 0;
};

std::vector<double> alpha_grid(double lo, double hi, std::size_t n);

/// Initial values on a regular nx-by-ny grid over [x_lo, x_hi] x [y_lo, y_hi].
std::vector<Point2d> init_grid(double x_lo, double x_hi, std::size_t nx, double y_lo, double y_hi, std::size_t ny);

SweepResult bifurcation_sweep(const SweepSpec& spec, const SimConfig& cfg);

/// Envelope of |x - x*| extrapolated to the tail's limit (Aitken delta-squared
/// on the envelope at the start, middle and end of the tail).
double extrapolated_deviation(std::span<const double> deviations, std::size_t window = 10);

struct CollapseOptions {
    double tol = 1e-3;
    std::size_t window = 10;
};

/// Smallest alpha on the grid from which every larger alpha has all its
/// cells collapsed onto x*. Empty when the largest alpha has not collapsed.
std::optional<double> detect_collapse(const SweepResult& sweep, double x_target, CollapseOptions opts = {});

/// Post-transient tails over all initial points, one noise stream per init.
std::vector<Point2d> limit_set(const MapParamsd& params, Branch branch, const ControlSchedule& schedule,
                               std::span<const Point2d> inits, const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Monte Carlo

struct InitBox {
    Point2d lo{-1.0, -1.0};
    Point2d hi{1.0, 1.0};
};

/// Fixed points are used cyclically by trial index; boxes are sampled
/// uniformly from a stream independent of the control noise.
using InitSampler = std::variant<std::vector<Point2d>, InitBox>;

struct MonteCarloReport {
    std::size_t trials = 0;
    std::size_t converged = 0;
    double fraction = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::map<std::size_t, std::size_t> periodic; ///< period -> count
    std::size_t bounded = 0;
    std::size_t escaped = 0;
    std::size_t failed = 0;
};

/// 95% Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n);

MonteCarloReport mc_convergence(const MapParamsd& params, Branch branch, const ControlSchedule& schedule,
                                const InitSampler& inits, std::size_t trials, const SimConfig& cfg);

/// Running means (1/k) sum ln nu(i), k = 1..n.
std::vector<double> lln_average(const NuModel& model, std::size_t n, std::uint64_t seed);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace vmtoc
