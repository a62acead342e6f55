#include "vmtoc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace vmtoc {

namespace {

double dist_inf(const Point2d& a, const Point2d& b)
{
    return (a - b).lpNorm<Eigen::Infinity>();
}

bool escaped(const Point2d& p, double bound)
{
    return !all_finite(p) || p.lpNorm<Eigen::Infinity>() > bound;
}

/// Start index of the final run of points within tol of the target, or
/// points.size() when the last point is outside.
std::size_t final_run_start(const std::vector<Point2d>& pts, const Point2d& target, double tol)
{
    std::size_t i = pts.size();
    while (i > 0 && dist_inf(pts[i - 1], target) < tol)
        --i;
    return i;
}

} // namespace

void validate(const SimConfig& cfg)
{
    if (cfg.steps == 0)
        throw std::invalid_argument("steps must be positive");
    if (!(cfg.conv_tol > 0.0))
        throw std::invalid_argument("conv_tol must be positive");
    if (cfg.conv_window == 0)
        throw std::invalid_argument("conv_window must be positive");
    if (!(cfg.escape_bound > 1.0))
        throw std::invalid_argument("escape_bound must exceed 1");
    if (cfg.record_tail == 0)
        throw std::invalid_argument("record_tail must be positive");
    if (cfg.transient > cfg.steps || cfg.record_tail > cfg.steps - cfg.transient)
        throw std::invalid_argument("record_tail must not exceed steps - transient");
    if (cfg.period_max == 0)
        throw std::invalid_argument("period_max must be positive");
    if (!(cfg.period_tol > 0.0))
        throw std::invalid_argument("period_tol must be positive");
    if (!all_finite(cfg.initial))
        throw std::invalid_argument("initial point must be finite");
}

std::string to_string(const Outcome& o)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, outcome::Converged>)
                return "converged(" + std::to_string(v.at_step) + ")";
            else if constexpr (std::is_same_v<T, outcome::Periodic>)
                return "periodic(" + std::to_string(v.period) + ")";
            else if constexpr (std::is_same_v<T, outcome::Bounded>)
                return "bounded";
            else
                return "escaped(" + std::to_string(v.at_step) + ")";
        },
        o);
}

bool is_converged(const Outcome& o)
{
    return std::holds_alternative<outcome::Converged>(o);
}

std::size_t period_of(const Outcome& o)
{
    const auto* p = std::get_if<outcome::Periodic>(&o);
    return p ? p->period : 0;
}

Trajectory run_trajectory(const MapParamsd& params, Branch branch, const ControlSchedule& schedule,
                          const SimConfig& cfg)
{
    return run_trajectory(params, branch, schedule, cfg, cfg.initial, trial_stream(cfg.seed, 0));
}

Trajectory run_trajectory(const MapParamsd& params, Branch branch, const ControlSchedule& schedule,
                          const SimConfig& cfg, const Point2d& initial, RngState stream)
{
    validate(cfg);
    validate(schedule);
    const Point2d target = fixed_point(params, branch);

    Trajectory traj;
    traj.points.reserve(cfg.steps + 1);
    traj.controls.reserve(cfg.steps);
    traj.points.push_back(initial);
    if (escaped(initial, cfg.escape_bound)) {
        traj.outcome = outcome::Escaped{0};
        return traj;
    }

    std::size_t run = dist_inf(initial, target) < cfg.conv_tol ? 1 : 0;
    Point2d x = initial;
    for (std::size_t n = 0; n < cfg.steps; ++n) {
        const ControlStep ctl = control_at_step(schedule, n, stream);
        stream = ctl.rng;
        x = vmtoc_step(params, target, ctl.d1, ctl.d2, x);
        traj.controls.emplace_back(ctl.d1, ctl.d2);
        if (escaped(x, cfg.escape_bound)) {
            traj.outcome = outcome::Escaped{n + 1};
            return traj;
        }
        traj.points.push_back(x);
        run = dist_inf(x, target) < cfg.conv_tol ? run + 1 : 0;
        if (cfg.stop_early && run >= cfg.conv_window) {
            traj.outcome = outcome::Converged{traj.points.size() - run};
            return traj;
        }
    }
    traj.outcome = classify_tail(traj, target, cfg);
    return traj;
}

Outcome classify_tail(const Trajectory& traj, const Point2d& target, const SimConfig& cfg)
{
    const auto& pts = traj.points;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (escaped(pts[i], cfg.escape_bound))
            return outcome::Escaped{i};

    const std::size_t start = final_run_start(pts, target, cfg.conv_tol);
    if (pts.size() - start >= cfg.conv_window)
        return outcome::Converged{start};

    if (pts.size() < cfg.transient + cfg.record_tail)
        throw InsufficientData("trajectory has " + std::to_string(pts.size()) + " points, classification needs " +
                               std::to_string(cfg.transient + cfg.record_tail));

    const std::size_t tail_begin = pts.size() - cfg.record_tail;
    for (std::size_t k = 1; k <= cfg.period_max && k < cfg.record_tail; ++k) {
        bool periodic = true;
        for (std::size_t i = tail_begin + k; i < pts.size() && periodic; ++i)
            periodic = dist_inf(pts[i], pts[i - k]) < cfg.period_tol;
        if (!periodic)
            continue;
        if (k == 1 && start < pts.size())
            return outcome::Converged{start};
        return outcome::Periodic{k};
    }
    return outcome::Bounded{};
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure)
        std::rethrow_exception(failure);
}

std::vector<double> alpha_grid(double lo, double hi, std::size_t n)
{
    if (n == 0)
        return {};
    if (n == 1)
        return {lo};
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

std::vector<Point2d> init_grid(double x_lo, double x_hi, std::size_t nx, double y_lo, double y_hi, std::size_t ny)
{
    std::vector<Point2d> out;
    out.reserve(nx * ny);
    for (double x : alpha_grid(x_lo, x_hi, nx))
        for (double y : alpha_grid(y_lo, y_hi, ny))
            out.emplace_back(x, y);
    return out;
}

SweepResult bifurcation_sweep(const SweepSpec& spec, const SimConfig& cfg)
{
    if (!(spec.alpha_lo < spec.alpha_hi) || spec.alpha_lo < 0.0 || spec.alpha_hi >= 1.0)
        throw std::invalid_argument("alpha range must satisfy 0 <= lo < hi < 1");
    if (spec.inits.empty())
        throw std::invalid_argument("bifurcation sweep needs at least one initial point");
    if (spec.n_alpha == 0)
        throw std::invalid_argument("n_alpha must be positive");
    validate(cfg);
    fixed_point(spec.params, spec.branch);

    SimConfig run_cfg = cfg;
    run_cfg.stop_early = false;
    const std::vector<double> alphas = alpha_grid(spec.alpha_lo, spec.alpha_hi, spec.n_alpha);
    const std::size_t n_inits = spec.inits.size();
    const std::size_t n_cells = alphas.size() * n_inits;

    struct CellData {
        SweepCell cell;
        std::vector<double> xs;
    };
    std::vector<CellData> data(n_cells);

    parallel_for(n_cells, cfg.threads, [&](std::size_t idx) {
        CellData& out = data[idx];
        out.cell.alpha_index = idx / n_inits;
        out.cell.init_index = idx % n_inits;
        out.cell.alpha = alphas[out.cell.alpha_index];
        try {
            const auto schedule = stochastic_control({out.cell.alpha, spec.ell1, spec.dist1}, spec.ch2,
                                                     spec.allow_overshoot);
            const Trajectory traj = run_trajectory(spec.params, spec.branch, schedule, run_cfg,
                                                   spec.inits[out.cell.init_index], trial_stream(cfg.seed, idx));
            out.cell.outcome = traj.outcome;
            if (!std::holds_alternative<outcome::Escaped>(traj.outcome)) {
                const std::size_t begin = traj.points.size() - cfg.record_tail;
                for (std::size_t i = begin; i < traj.points.size(); ++i)
                    out.xs.push_back(traj.points[i].x());
            }
        } catch (const std::exception& e) {
            out.cell.error = e.what();
        }
    });

    SweepResult result;
    result.cells.reserve(n_cells);
    for (auto& d : data) {
        d.cell.first = result.points.size();
        d.cell.count = d.xs.size();
        for (double x : d.xs)
            result.points.emplace_back(d.cell.alpha, x);
        if (!d.cell.error.empty())
            ++result.failed;
        else if (std::holds_alternative<outcome::Escaped>(d.cell.outcome))
            ++result.escaped;
        result.cells.push_back(std::move(d.cell));
    }
    return result;
}

double extrapolated_deviation(std::span<const double> dev, std::size_t window)
{
    const std::size_t n = dev.size();
    if (n == 0)
        throw InsufficientData("no tail points to extrapolate");
    window = std::clamp<std::size_t>(window, 1, n);
    auto window_max = [&](std::size_t begin) {
        begin = std::min(begin, n - window);
        return *std::max_element(dev.begin() + static_cast<std::ptrdiff_t>(begin),
                                 dev.begin() + static_cast<std::ptrdiff_t>(begin + window));
    };
    const double a0 = window_max(0);
    const double a1 = window_max(n / 2 >= window / 2 ? n / 2 - window / 2 : 0);
    const double a2 = window_max(n - window);

    double limit = a2;
    const double denom = (a2 - a1) - (a1 - a0);
    if (a2 < a1 && a1 < a0 && denom > 0.0)
        limit = a2 - (a2 - a1) * (a2 - a1) / denom;
    return std::max(limit, 0.0);
}

std::optional<double> detect_collapse(const SweepResult& sweep, double x_target, CollapseOptions opts)
{
    std::map<std::size_t, std::pair<double, bool>> per_alpha; // index -> (alpha, all collapsed)
    std::vector<double> dev;
    for (const SweepCell& cell : sweep.cells) {
        bool collapsed = cell.error.empty() && cell.count > 0;
        if (collapsed) {
            dev.clear();
            for (std::size_t i = cell.first; i < cell.first + cell.count; ++i)
                dev.push_back(std::abs(sweep.points[i].second - x_target));
            collapsed = extrapolated_deviation(dev, opts.window) < opts.tol;
        }
        auto [it, inserted] = per_alpha.try_emplace(cell.alpha_index, cell.alpha, collapsed);
        if (!inserted)
            it->second.second = it->second.second && collapsed;
    }

    std::optional<double> onset;
    for (auto it = per_alpha.rbegin(); it != per_alpha.rend(); ++it) {
        if (!it->second.second)
            break;
        onset = it->second.first;
    }
    return onset;
}

std::vector<Point2d> limit_set(const MapParamsd& params, Branch branch, const ControlSchedule& schedule,
                               std::span<const Point2d> inits, const SimConfig& cfg)
{
    SimConfig run_cfg = cfg;
    run_cfg.stop_early = false;
    std::vector<std::vector<Point2d>> tails(inits.size());
    parallel_for(inits.size(), cfg.threads, [&](std::size_t i) {
        const Trajectory traj = run_trajectory(params, branch, schedule, run_cfg, inits[i], trial_stream(cfg.seed, i));
        if (std::holds_alternative<outcome::Escaped>(traj.outcome))
            return;
        tails[i].assign(traj.points.end() - static_cast<std::ptrdiff_t>(cfg.record_tail), traj.points.end());
    });

    std::vector<Point2d> out;
    for (const auto& t : tails)
        out.insert(out.end(), t.begin(), t.end());
    return out;
}

// ---------------------------------------------------------------------------

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n)
{
    if (n == 0)
        return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, std::min(centre - half, p)), std::min(1.0, std::max(centre + half, p))};
}

MonteCarloReport mc_convergence(const MapParamsd& params, Branch branch, const ControlSchedule& schedule,
                                const InitSampler& inits, std::size_t trials, const SimConfig& cfg)
{
    if (trials == 0)
        throw std::invalid_argument("trials must be at least 1");
    if (const auto* fixed = std::get_if<std::vector<Point2d>>(&inits); fixed && fixed->empty())
        throw std::invalid_argument("initial point set is empty");
    validate(cfg);
    validate(schedule);
    fixed_point(params, branch);

    auto initial_for = [&](std::size_t k) -> Point2d {
        if (const auto* fixed = std::get_if<std::vector<Point2d>>(&inits))
            return (*fixed)[k % fixed->size()];
        const auto& box = std::get<InitBox>(inits);
        RngState s = trial_stream(~cfg.seed, k);
        const double u = 0.5 * (sample_noise(NoiseDist::UniformM1P1, s) + 1.0);
        const double v = 0.5 * (sample_noise(NoiseDist::UniformM1P1, s) + 1.0);
        return {box.lo.x() + u * (box.hi.x() - box.lo.x()), box.lo.y() + v * (box.hi.y() - box.lo.y())};
    };

    std::vector<std::optional<Outcome>> outcomes(trials);
    parallel_for(trials, cfg.threads, [&](std::size_t k) {
        try {
            outcomes[k] = run_trajectory(params, branch, schedule, cfg, initial_for(k), trial_stream(cfg.seed, k)).outcome;
        } catch (const std::exception&) {
            outcomes[k].reset();
        }
    });

    MonteCarloReport rep;
    rep.trials = trials;
    for (const auto& o : outcomes) {
        if (!o) {
            ++rep.failed;
            continue;
        }
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, outcome::Converged>)
                    ++rep.converged;
                else if constexpr (std::is_same_v<T, outcome::Periodic>)
                    ++rep.periodic[v.period];
                else if constexpr (std::is_same_v<T, outcome::Bounded>)
                    ++rep.bounded;
                else
                    ++rep.escaped;
            },
            *o);
    }
    rep.fraction = static_cast<double>(rep.converged) / static_cast<double>(trials);
    std::tie(rep.ci_low, rep.ci_high) = wilson_interval(rep.converged, trials);
    return rep;
}

std::vector<double> lln_average(const NuModel& model, std::size_t n, std::uint64_t seed)
{
    if (!(model.c > std::abs(model.p) + std::abs(model.q)))
        throw DomainError("contraction factor can be non-positive: need c > |p| + |q|");
    RngState rng = trial_stream(seed, 0);
    std::vector<double> out;
    out.reserve(n);
    double mean = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double chi1 = sample_noise(model.dist1, rng);
        const double chi2 = sample_noise(model.dist2, rng);
        const double v = std::log(model.c + model.p * chi1 + model.q * chi2);
        // Incremental form keeps a constant sequence exactly constant.
        mean += (v - mean) / static_cast<double>(k);
        out.push_back(mean);
    }
    return out;
}

} // namespace vmtoc
