#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "presets.hpp"
#include "verify.hpp"
#include "vmtoc/csv.hpp"
#include "vmtoc/sim.hpp"

namespace chaosctl {

namespace {

using vmtoc::csv::format_double;

constexpr const char* kDefaultInitGrid = "0.1:0.8:5,0.1:0.2:4";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string map = "henon";
    double a = 1.4;
    double b = 0.3;
    std::string branch = "plus";

    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double ell1 = 0.0;
    double ell2 = 0.0;
    std::string dist1 = "bernoulli";
    std::string dist2 = "bernoulli";
    bool unbounded = false;

    double x0 = 0.3;
    double y0 = 0.1;
    std::size_t steps = 2000;
    std::size_t transient = 500;
    std::size_t tail = 200;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;

    std::string alpha_range = "0:0.9:200";
    std::string init_grid;
    double box = 0.0;
    std::size_t trials = 200;

    std::string norm;
    double radius = 0.0;
    double nu = 1.0;
    std::string method = "closed";
    std::uint64_t samples = 1'000'000;

    std::string filter;
    std::string preset;
    bool list = false;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
};

double parse_double(const std::string& text, const std::string& flag)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw UsageError(flag + ": '" + text + "' is not a decimal number");
    return v;
}

std::size_t parse_count(const std::string& text, const std::string& flag)
{
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v == 0)
        throw UsageError(flag + ": '" + text + "' is not a positive integer");
    return v;
}

Range parse_range(const std::string& text, const std::string& flag)
{
    const auto c1 = text.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw UsageError(flag + ": expected lo:hi:n, got '" + text + "'");
    Range r{parse_double(text.substr(0, c1), flag), parse_double(text.substr(c1 + 1, c2 - c1 - 1), flag),
            parse_count(text.substr(c2 + 1), flag)};
    if (!(r.lo <= r.hi))
        throw UsageError(flag + ": lo must not exceed hi");
    return r;
}

std::string render(const Range& r)
{
    return format_double(r.lo) + ":" + format_double(r.hi) + ":" + std::to_string(r.n);
}

std::pair<Range, Range> parse_grid(const std::string& text)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw UsageError("--init-grid: expected xlo:xhi:nx,ylo:yhi:ny");
    return {parse_range(text.substr(0, comma), "--init-grid"), parse_range(text.substr(comma + 1), "--init-grid")};
}

vmtoc::MapParamsd map_params(const Options& o)
{
    vmtoc::MapParamsd p;
    p.kind = o.map == "lozi" ? vmtoc::MapKind::Lozi : vmtoc::MapKind::Henon;
    p.a = o.a;
    p.b = o.b;
    return p;
}

vmtoc::Branch branch_of(const Options& o)
{
    return o.branch == "minus" ? vmtoc::Branch::Minus : vmtoc::Branch::Plus;
}

vmtoc::NoiseDist dist_of(const std::string& s)
{
    return s == "uniform" ? vmtoc::NoiseDist::UniformM1P1 : vmtoc::NoiseDist::BernoulliPM1;
}

vmtoc::NormKind norm_of(const std::string& s)
{
    if (s == "l1")
        return vmtoc::NormKind::L1;
    if (s == "spectral")
        return vmtoc::NormKind::L2Spectral;
    return vmtoc::NormKind::LInf;
}

vmtoc::ControlChannel channel2(const Options& o)
{
    return {o.alpha2, o.ell2, dist_of(o.dist2)};
}

vmtoc::ControlSchedule schedule_of(const Options& o)
{
    return vmtoc::stochastic_control({o.alpha1, o.ell1, dist_of(o.dist1)}, channel2(o), o.unbounded);
}

vmtoc::SimConfig sim_config(const Options& o)
{
    vmtoc::SimConfig cfg;
    cfg.initial = vmtoc::Point2d(o.x0, o.y0);
    cfg.steps = o.steps;
    cfg.transient = o.transient;
    cfg.record_tail = o.tail;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    try {
        vmtoc::validate(cfg);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--steps/--transient/--tail: ") + e.what());
    }
    return cfg;
}

// -- option registration ------------------------------------------------------

void add_model(CLI::App& app, Options& o)
{
    app.add_option("--map", o.map, "map family")->check(CLI::IsMember({"henon", "lozi"}));
    app.add_option("--a", o.a, "map parameter a");
    app.add_option("--b", o.b, "map parameter b");
    app.add_option("--branch", o.branch, "fixed point used as target")->check(CLI::IsMember({"plus", "minus"}));
}

void add_channel2(CLI::App& app, Options& o)
{
    app.add_option("--alpha2,--beta", o.alpha2, "mean y-control intensity");
    app.add_option("--ell2", o.ell2, "y-control noise amplitude");
    app.add_option("--dist2", o.dist2, "y-control noise law")->check(CLI::IsMember({"bernoulli", "uniform"}));
}

void add_channel1_noise(CLI::App& app, Options& o)
{
    app.add_option("--ell1", o.ell1, "x-control noise amplitude");
    app.add_option("--dist1", o.dist1, "x-control noise law")->check(CLI::IsMember({"bernoulli", "uniform"}));
}

void add_control(CLI::App& app, Options& o)
{
    app.add_option("--alpha1,--alpha", o.alpha1, "mean x-control intensity");
    add_channel1_noise(app, o);
    add_channel2(app, o);
    app.add_flag("--unbounded-control", o.unbounded, "admit realized intensities in [0, 2]");
}

void add_run(CLI::App& app, Options& o, std::size_t steps, std::size_t transient, std::size_t tail)
{
    o.steps = steps;
    o.transient = transient;
    o.tail = tail;
    app.add_option("--steps", o.steps, "iterations")->check(CLI::PositiveNumber);
    app.add_option("--transient", o.transient, "iterations discarded before the recorded tail");
    app.add_option("--tail", o.tail, "recorded post-transient iterations")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "noise seed (default: $CHAOSCTL_SEED or 0)");
    app.add_option("--threads", o.threads, "worker cap; results do not depend on it");
    app.add_option("--out", o.out, "output file (default: standard output)");
}

void add_initial(CLI::App& app, Options& o)
{
    app.add_option("--x0", o.x0, "initial x");
    app.add_option("--y0", o.y0, "initial y");
}

// -- canonical header ----------------------------------------------------------

class Header {
public:
    explicit Header(const std::string& sub) : line_("chaosctl " + sub) {}

    Header& flag(const std::string& name, const std::string& value)
    {
        line_ += " " + name + " " + value;
        return *this;
    }
    Header& flag(const std::string& name, double value) { return flag(name, format_double(value)); }
    Header& count(const std::string& name, std::uint64_t value) { return flag(name, std::to_string(value)); }
    Header& toggle(const std::string& name, bool on)
    {
        if (on)
            line_ += " " + name;
        return *this;
    }

    const std::string& str() const { return line_; }

private:
    std::string line_;
};

void model_flags(Header& h, const Options& o)
{
    h.flag("--map", o.map).flag("--a", o.a).flag("--b", o.b).flag("--branch", o.branch);
}

void channel_flags(Header& h, const Options& o, bool with_alpha1)
{
    if (with_alpha1)
        h.flag("--alpha1", o.alpha1);
    h.flag("--ell1", o.ell1).flag("--dist1", o.dist1);
    h.flag("--alpha2", o.alpha2).flag("--ell2", o.ell2).flag("--dist2", o.dist2);
    h.toggle("--unbounded-control", o.unbounded);
}

void run_flags(Header& h, const Options& o)
{
    h.count("--steps", o.steps).count("--transient", o.transient).count("--tail", o.tail).count("--seed", o.seed);
}

// -- output --------------------------------------------------------------------

void emit(const Options& o, const std::string& content, std::ostream& out, std::ostream& err)
{
    if (o.out.empty()) {
        out << content;
        return;
    }
    vmtoc::csv::write_atomic(o.out, content);
    err << "wrote " << o.out << '\n';
}

// -- subcommands ----------------------------------------------------------------

std::string cmd_simulate(const Options& o)
{
    auto cfg = sim_config(o);
    cfg.stop_early = false;
    const auto traj = vmtoc::run_trajectory(map_params(o), branch_of(o), schedule_of(o), cfg);

    Header h("simulate");
    model_flags(h, o);
    channel_flags(h, o, true);
    h.flag("--x0", o.x0).flag("--y0", o.y0);
    run_flags(h, o);

    vmtoc::csv::Table t({"n", "x", "y", "d1", "d2"});
    t.comment(h.str());
    t.comment("outcome " + vmtoc::to_string(traj.outcome));
    for (std::size_t n = 0; n < traj.points.size(); ++n) {
        const auto& p = traj.points[n];
        if (n < traj.controls.size())
            t.row({std::to_string(n), format_double(p.x()), format_double(p.y()),
                   format_double(traj.controls[n].first), format_double(traj.controls[n].second)});
        else
            t.row({std::to_string(n), format_double(p.x()), format_double(p.y()), "", ""});
    }
    return t.str();
}

std::string cmd_bifurcation(const Options& o)
{
    const Range alphas = parse_range(o.alpha_range, "--alpha-range");
    const auto [gx, gy] = parse_grid(o.init_grid.empty() ? std::string(kDefaultInitGrid) : o.init_grid);
    auto cfg = sim_config(o);

    vmtoc::SweepSpec spec;
    spec.params = map_params(o);
    spec.branch = branch_of(o);
    spec.alpha_lo = alphas.lo;
    spec.alpha_hi = alphas.hi;
    spec.n_alpha = alphas.n;
    spec.ell1 = o.ell1;
    spec.dist1 = dist_of(o.dist1);
    spec.ch2 = channel2(o);
    spec.allow_overshoot = o.unbounded;
    spec.inits = vmtoc::init_grid(gx.lo, gx.hi, gx.n, gy.lo, gy.hi, gy.n);
    if (!(spec.alpha_lo >= 0.0 && spec.alpha_hi < 1.0 && spec.alpha_lo < spec.alpha_hi))
        throw UsageError("--alpha-range: need 0 <= lo < hi < 1");

    const auto result = vmtoc::bifurcation_sweep(spec, cfg);
    const double x_star = vmtoc::fixed_point(spec.params, spec.branch).x();
    const auto collapse = vmtoc::detect_collapse(result, x_star);

    Header h("bifurcation");
    model_flags(h, o);
    h.flag("--alpha-range", render(alphas));
    channel_flags(h, o, false);
    h.flag("--init-grid", render(gx) + "," + render(gy));
    run_flags(h, o);

    vmtoc::csv::Table t({"alpha", "x"});
    t.comment(h.str());
    t.comment("cells " + std::to_string(result.cells.size()) + " escaped " + std::to_string(result.escaped) +
              " failed " + std::to_string(result.failed));
    t.comment("collapse_alpha " + (collapse ? format_double(*collapse) : std::string("none")));
    for (const auto& [alpha, x] : result.points)
        t.row(std::vector<double>{alpha, x});
    return t.str();
}

std::string cmd_limitset(const Options& o)
{
    auto cfg = sim_config(o);
    std::vector<vmtoc::Point2d> inits;
    Header h("limitset");
    model_flags(h, o);
    channel_flags(h, o, true);
    if (o.init_grid.empty()) {
        inits.emplace_back(o.x0, o.y0);
        h.flag("--x0", o.x0).flag("--y0", o.y0);
    } else {
        const auto [gx, gy] = parse_grid(o.init_grid);
        inits = vmtoc::init_grid(gx.lo, gx.hi, gx.n, gy.lo, gy.hi, gy.n);
        h.flag("--init-grid", render(gx) + "," + render(gy));
    }
    run_flags(h, o);

    const auto pts = vmtoc::limit_set(map_params(o), branch_of(o), schedule_of(o), inits, cfg);
    vmtoc::csv::Table t({"x", "y"});
    t.comment(h.str());
    t.comment("points " + std::to_string(pts.size()) + " of " + std::to_string(inits.size() * o.tail));
    for (const auto& p : pts)
        t.row(std::vector<double>{p.x(), p.y()});
    return t.str();
}

std::string cmd_montecarlo(const Options& o)
{
    auto cfg = sim_config(o);
    Header h("montecarlo");
    model_flags(h, o);
    channel_flags(h, o, true);
    vmtoc::InitSampler sampler;
    if (o.box > 0.0) {
        sampler = vmtoc::InitBox{vmtoc::Point2d(-o.box, -o.box), vmtoc::Point2d(o.box, o.box)};
        h.flag("--box", o.box);
    } else {
        sampler = std::vector<vmtoc::Point2d>{vmtoc::Point2d(o.x0, o.y0)};
        h.flag("--x0", o.x0).flag("--y0", o.y0);
    }
    h.count("--trials", o.trials);
    run_flags(h, o);

    const auto rep = vmtoc::mc_convergence(map_params(o), branch_of(o), schedule_of(o), sampler, o.trials, cfg);
    vmtoc::csv::Table t({"trials", "converged", "fraction", "ci_low", "ci_high"});
    t.comment(h.str());
    for (const auto& [k, n] : rep.periodic)
        t.comment("periodic(" + std::to_string(k) + ") " + std::to_string(n));
    t.comment("bounded " + std::to_string(rep.bounded));
    t.comment("escaped " + std::to_string(rep.escaped));
    t.comment("failed " + std::to_string(rep.failed));
    t.row({std::to_string(rep.trials), std::to_string(rep.converged), format_double(rep.fraction),
           format_double(rep.ci_low), format_double(rep.ci_high)});
    return t.str();
}

std::string cmd_threshold(const Options& o)
{
    double v = 0.0;
    if (o.norm.empty())
        v = vmtoc::local_threshold(map_params(o), branch_of(o), o.alpha2);
    else
        v = vmtoc::norm_threshold(map_params(o), branch_of(o), o.radius, o.alpha2, norm_of(o.norm), o.nu);
    return "alpha_star," + vmtoc::csv::format_significant(v, 5) + "\n";
}

std::string cmd_explog(const Options& o)
{
    const auto model = vmtoc::build_nu_model(map_params(o), branch_of(o), o.radius, norm_of(o.norm),
                                             {o.alpha1, o.ell1, dist_of(o.dist1)}, channel2(o));
    vmtoc::ExpectationMethod m;
    m.kind = o.method == "quadrature"   ? vmtoc::ExpectationKind::Quadrature
             : o.method == "montecarlo" ? vmtoc::ExpectationKind::MonteCarlo
                                        : vmtoc::ExpectationKind::ClosedForm;
    m.samples = o.samples;
    m.seed = o.seed;
    return "expected_log_nu," + format_double(vmtoc::expected_log_nu(model, m)) + "\n";
}

std::string cmd_minnoise(const Options& o)
{
    vmtoc::MinNoiseQuery q;
    q.params = map_params(o);
    q.branch = branch_of(o);
    q.radius = o.radius;
    q.norm = norm_of(o.norm);
    q.alpha1 = o.alpha1;
    q.dist1 = dist_of(o.dist1);
    q.ch2 = channel2(o);
    return "ell1_min," + vmtoc::csv::format_significant(vmtoc::min_noise_for_stability(q), 5) + "\n";
}

void resolve_seed(const CLI::App& sub, Options& o)
{
    if (sub.get_option_no_throw("--seed") == nullptr || sub.count("--seed") > 0)
        return;
    const char* env = std::getenv("CHAOSCTL_SEED");
    if (env == nullptr || *env == '\0')
        return;
    const std::string text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), o.seed);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw UsageError("CHAOSCTL_SEED: '" + text + "' is not an unsigned 64-bit integer");
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Stabilization of chaotic maps by stochastic target-oriented control", "chaosctl"};
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "single controlled trajectory (n,x,y,d1,d2)");
    add_model(*simulate, o);
    add_control(*simulate, o);
    add_initial(*simulate, o);
    add_run(*simulate, o, 2000, 500, 200);

    auto* bifurcation = app.add_subcommand("bifurcation", "bifurcation diagram in alpha1 (alpha,x)");
    add_model(*bifurcation, o);
    bifurcation->add_option("--alpha-range", o.alpha_range, "lo:hi:n grid of alpha1")->required();
    add_channel1_noise(*bifurcation, o);
    add_channel2(*bifurcation, o);
    bifurcation->add_flag("--unbounded-control", o.unbounded, "admit realized intensities in [0, 2]");
    bifurcation->add_option("--init-grid", o.init_grid, "xlo:xhi:nx,ylo:yhi:ny initial values")
        ->default_str(kDefaultInitGrid);
    add_run(*bifurcation, o, 700, 500, 200);

    auto* limitset = app.add_subcommand("limitset", "post-transient states (x,y)");
    add_model(*limitset, o);
    add_control(*limitset, o);
    add_initial(*limitset, o);
    limitset->add_option("--init-grid", o.init_grid, "xlo:xhi:nx,ylo:yhi:ny instead of --x0/--y0");
    add_run(*limitset, o, 2000, 1000, 1000);

    auto* montecarlo = app.add_subcommand("montecarlo", "convergence frequency over independent trials");
    add_model(*montecarlo, o);
    add_control(*montecarlo, o);
    add_initial(*montecarlo, o);
    montecarlo->add_option("--box", o.box, "sample initial values uniformly with |x|,|y| <= L")
        ->check(CLI::PositiveNumber);
    montecarlo->add_option("--trials", o.trials, "number of trials")->check(CLI::PositiveNumber);
    add_run(*montecarlo, o, 2000, 500, 200);

    auto* threshold = app.add_subcommand("threshold", "critical x-control intensity");
    add_model(*threshold, o);
    threshold->add_option("--alpha2,--beta", o.alpha2, "y-control intensity");
    threshold->add_option("--norm", o.norm, "norm bound instead of the trace-determinant test")
        ->check(CLI::IsMember({"linf", "l1", "spectral"}));
    threshold->add_option("--radius", o.radius, "radius of the ball around the target");
    threshold->add_option("--nu", o.nu, "required contraction rate, 0 < nu <= 1");

    auto* explog = app.add_subcommand("explog", "expected log contraction factor");
    add_model(*explog, o);
    add_control(*explog, o);
    explog->add_option("--norm", o.norm, "contraction norm")->check(CLI::IsMember({"linf", "l1"}));
    explog->add_option("--radius", o.radius, "radius of the ball around the target");
    explog->add_option("--method", o.method, "evaluation method")
        ->check(CLI::IsMember({"closed", "quadrature", "montecarlo"}));
    explog->add_option("--samples", o.samples, "Monte Carlo draws")->check(CLI::PositiveNumber);
    explog->add_option("--seed", o.seed, "Monte Carlo seed");

    auto* minnoise = app.add_subcommand("minnoise", "smallest x-noise amplitude with negative E ln nu");
    add_model(*minnoise, o);
    minnoise->add_option("--alpha1,--alpha", o.alpha1, "mean x-control intensity");
    minnoise->add_option("--dist1", o.dist1, "x-control noise law")->check(CLI::IsMember({"bernoulli", "uniform"}));
    add_channel2(*minnoise, o);
    minnoise->add_option("--norm", o.norm, "contraction norm")->check(CLI::IsMember({"linf", "l1"}));
    minnoise->add_option("--radius", o.radius, "radius of the ball around the target");

    auto* repro = app.add_subcommand("repro", "regenerate a figure preset");
    repro->add_option("id", o.preset, "preset id, e.g. fig3d");
    repro->add_flag("--list", o.list, "list preset ids");
    repro->add_option("--out", o.out, "output file (default: standard output)");
    repro->add_option("--threads", o.threads, "worker cap; results do not depend on it");

    auto* verify = app.add_subcommand("verify", "run the acceptance table");
    verify->add_option("--only", o.filter, "single criterion id (c1..c7)");
    verify->add_option("--threads", o.threads, "worker cap");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        for (auto* sub : {simulate, bifurcation, limitset, montecarlo, explog})
            if (sub->parsed())
                resolve_seed(*sub, o);

        if (repro->parsed()) {
            if (o.list) {
                for (const auto& p : presets())
                    out << p.id << "  " << p.description << '\n';
                return 0;
            }
            const auto preset = find_preset(o.preset);
            if (!preset) {
                err << "repro: unknown preset '" << o.preset << "' (try repro --list)\n";
                return 2;
            }
            std::vector<std::string> forwarded = preset->args;
            if (!o.out.empty())
                forwarded.insert(forwarded.end(), {"--out", o.out});
            if (o.threads != 0)
                forwarded.insert(forwarded.end(), {"--threads", std::to_string(o.threads)});
            return run_command(forwarded, out, err);
        }
        if (verify->parsed()) {
            if (!o.filter.empty() && !(o.filter.size() == 2 && o.filter[0] == 'c' && o.filter[1] >= '1' &&
                                       o.filter[1] <= '7'))
                throw UsageError("--only: expected one of c1..c7");
            return all_pass(run_acceptance(o.filter, out, o.threads)) ? 0 : 1;
        }

        std::string content;
        if (simulate->parsed())
            content = cmd_simulate(o);
        else if (bifurcation->parsed())
            content = cmd_bifurcation(o);
        else if (limitset->parsed())
            content = cmd_limitset(o);
        else if (montecarlo->parsed())
            content = cmd_montecarlo(o);
        else if (threshold->parsed())
            content = cmd_threshold(o);
        else if (explog->parsed())
            content = cmd_explog(o);
        else
            content = cmd_minnoise(o);
        emit(o, content, out, err);
        return 0;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const vmtoc::InvalidControl& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace chaosctl
