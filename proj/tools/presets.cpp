#include "presets.hpp"

#include <algorithm>

namespace chaosctl {

namespace {

using Args = std::vector<std::string>;

Args join(Args a, const Args& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

const Args kInitGrid = {"--init-grid", "0.1:0.8:5,0.1:0.2:4"};

std::vector<Preset> build()
{
    std::vector<Preset> out;
    auto add = [&](std::string id, std::string what, Args args) {
        out.push_back({std::move(id), std::move(what), std::move(args)});
    };

    const Args henon = {"--map", "henon", "--a", "1.4", "--b", "0.3"};
    const Args lozi = {"--map", "lozi", "--a", "1.4", "--b", "0.3"};
    const Args bif = join({"--steps", "700", "--transient", "500", "--tail", "200"}, kInitGrid);

    // Deterministic bifurcation diagrams over the x-control.
    add("fig1a", "Henon bifurcation in alpha, no y-control",
        join(join(join({"bifurcation"}, henon), {"--alpha-range", "0:0.9:451", "--beta", "0"}), bif));
    add("fig1b", "Henon bifurcation in alpha, y-control 0.9",
        join(join(join({"bifurcation"}, henon), {"--alpha-range", "0:0.9:451", "--beta", "0.9"}), bif));
    add("fig2a", "Lozi bifurcation in alpha, no y-control",
        join(join(join({"bifurcation"}, lozi), {"--alpha-range", "0:0.9:451", "--beta", "0"}), bif));
    add("fig2b", "Lozi bifurcation in alpha, y-control 0.9",
        join(join(join({"bifurcation"}, lozi), {"--alpha-range", "0:0.9:451", "--beta", "0.9"}), bif));

    // Single runs and limit sets under Bernoulli noise in the x-control.
    const char* panels = "abcd";
    const std::vector<std::string> fig3_ell = {"0", "0.15", "0.25", "0.3"};
    const std::vector<std::string> fig4_ell = {"0.05", "0.15", "0.25", "0.3"};
    const std::vector<std::string> fig5_ell = {"0", "0.05", "0.1", "0.15"};
    const std::vector<std::string> fig6_ell = {"0.03", "0.08", "0.135", "0.145"};
    const std::vector<std::string> fig7_ell2 = {"0", "0.4", "0.5", "0.55"};
    for (int i = 0; i < 4; ++i) {
        const std::string p(1, panels[i]);
        add("fig3" + p, "Henon run, alpha1 0.44, ell1 " + fig3_ell[i],
            join(join({"simulate"}, henon), {"--alpha1", "0.44", "--ell1", fig3_ell[i], "--dist1", "bernoulli",
                                             "--x0", "0.3", "--y0", "0.1", "--steps", "2000"}));
        add("fig4" + p, "Henon limit set, alpha1 0.44, ell1 " + fig4_ell[i],
            join(join({"limitset"}, henon), {"--alpha1", "0.44", "--ell1", fig4_ell[i], "--dist1", "bernoulli",
                                             "--x0", "0.3", "--y0", "0.1", "--steps", "10000", "--transient",
                                             "5000", "--tail", "5000"}));
        add("fig5" + p, "Lozi run, alpha1 0.4, ell1 " + fig5_ell[i],
            join(join({"simulate"}, lozi), {"--alpha1", "0.4", "--ell1", fig5_ell[i], "--dist1", "bernoulli",
                                            "--x0", "-10", "--y0", "-15", "--steps", "2000"}));
        add("fig6" + p, "Lozi limit set, alpha1 0.4, ell1 " + fig6_ell[i],
            join(join({"limitset"}, lozi), {"--alpha1", "0.4", "--ell1", fig6_ell[i], "--dist1", "bernoulli",
                                            "--x0", "-10", "--y0", "-15", "--steps", "10000", "--transient",
                                            "5000", "--tail", "5000"}));
        add("fig7" + p, "Lozi run, alpha1 0.27, ell1 0.2, alpha2 0.9, ell2 " + fig7_ell2[i],
            join(join({"simulate"}, lozi),
                 {"--alpha1", "0.27", "--ell1", "0.2", "--dist1", "bernoulli", "--alpha2", "0.9", "--ell2",
                  fig7_ell2[i], "--dist2", "bernoulli", "--unbounded-control", "--x0", "-10", "--y0", "-15",
                  "--steps", "2000"}));
    }

    // Noisy bifurcation diagrams; the alpha range keeps alpha +- ell1 inside [0, 1).
    const std::vector<std::pair<std::string, std::string>> noise = {
        {"0", "bernoulli"}, {"0.2861", "bernoulli"}, {"0.2861", "uniform"}};
    const std::vector<std::pair<std::string, std::string>> lozi_noise = {
        {"0", "bernoulli"}, {"0.2", "bernoulli"}, {"0.2", "uniform"}};
    for (int i = 0; i < 3; ++i) {
        const std::string p(1, panels[i]);
        add("fig8" + p, "Henon bifurcation, y-control 0.8, ell1 " + noise[i].first + " " + noise[i].second,
            join(join(join({"bifurcation"}, henon), {"--alpha-range", "0.29:0.71:211", "--alpha2", "0.8", "--ell1",
                                                     noise[i].first, "--dist1", noise[i].second}),
                 bif));
        add("fig9" + p, "Lozi bifurcation, y-control 0.9, ell1 " + lozi_noise[i].first + " " + lozi_noise[i].second,
            join(join(join({"bifurcation"}, lozi), {"--alpha-range", "0.21:0.79:291", "--alpha2", "0.9", "--ell1",
                                                    lozi_noise[i].first, "--dist1", lozi_noise[i].second}),
                 bif));
    }

    const std::vector<std::pair<std::string, std::string>> fig10 = {
        {"0.3", "bernoulli"}, {"0.3", "uniform"}, {"0.36", "bernoulli"}, {"0.36", "uniform"}};
    for (int i = 0; i < 4; ++i) {
        const std::string p(1, panels[i]);
        add("fig10" + p, "Henon limit set, ell1 0.2861, alpha2 0.9, alpha1 " + fig10[i].first + " " + fig10[i].second,
            join(join({"limitset"}, henon),
                 {"--alpha1", fig10[i].first, "--ell1", "0.2861", "--dist1", fig10[i].second, "--alpha2", "0.9",
                  "--x0", "0.3", "--y0", "0.1", "--steps", "10000", "--transient", "5000", "--tail", "5000"}));
    }
    return out;
}

} // namespace

const std::vector<Preset>& presets()
{
    static const std::vector<Preset> registry = build();
    return registry;
}

std::optional<Preset> find_preset(const std::string& id)
{
    const auto& all = presets();
    const auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.id == id; });
    if (it == all.end())
        return std::nullopt;
    return *it;
}

} // namespace chaosctl
