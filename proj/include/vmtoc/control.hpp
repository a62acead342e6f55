#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vmtoc/core.hpp"
#include "vmtoc/maps.hpp"
#include "vmtoc/rng.hpp"

namespace vmtoc {

enum class NoiseDist { BernoulliPM1, UniformM1P1 };

inline std::string to_string(NoiseDist dist)
{
    return dist == NoiseDist::BernoulliPM1 ? "bernoulli" : "uniform";
}

/// Consumes exactly one draw from the stream.
inline double sample_noise(NoiseDist dist, RngState& state) noexcept
{
    const auto [next, z] = next_rand(state);
    state = next;
    return dist == NoiseDist::BernoulliPM1 ? bernoulli_pm1(z) : uniform_pm1(z);
}

/// d = alpha + ell * chi with chi drawn from `dist`.
struct ControlChannel {
    double alpha = 0.0;
    double ell = 0.0;
    NoiseDist dist = NoiseDist::BernoulliPM1;
};

struct ConstantControl {
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Reused cyclically once exhausted.
struct SequenceControl {
    std::vector<std::pair<double, double>> values;
};

struct StochasticControl {
    ControlChannel ch1;
    ControlChannel ch2;
};

struct ControlSchedule {
    std::variant<ConstantControl, SequenceControl, StochasticControl> plan = ConstantControl{};
    /// Admit realized intensities in [0, 2] instead of [0, 1): |1 - d| <= 1
    /// still holds but the step may overshoot the target.
    bool allow_overshoot = false;
};

inline ControlSchedule constant_control(double d1, double d2)
{
    return ControlSchedule{ConstantControl{d1, d2}};
}

inline ControlSchedule stochastic_control(ControlChannel ch1, ControlChannel ch2, bool allow_overshoot = false)
{
    return ControlSchedule{StochasticControl{ch1, ch2}, allow_overshoot};
}

inline bool control_in_range(double d, bool allow_overshoot) noexcept
{
    return allow_overshoot ? (d >= 0.0 && d <= 2.0) : (d >= 0.0 && d < 1.0);
}

/// Admissibility of a channel: alpha in [0,1) and either no noise or
/// ell < min(alpha, 1 - alpha). With overshoot allowed only the realized
/// range alpha +- ell is constrained.
inline bool channel_admissible(const ControlChannel& ch, bool allow_overshoot = false) noexcept
{
    if (!std::isfinite(ch.alpha) || !std::isfinite(ch.ell) || ch.ell < 0.0)
        return false;
    if (!(ch.alpha >= 0.0 && ch.alpha < 1.0))
        return false;
    if (ch.ell == 0.0)
        return true;
    if (allow_overshoot)
        return control_in_range(ch.alpha - ch.ell, true) && control_in_range(ch.alpha + ch.ell, true);
    return ch.ell < std::min(ch.alpha, 1.0 - ch.alpha);
}

/// Throws InvalidControl when the schedule can realize an intensity outside
/// its admissible range.
inline void validate(const ControlSchedule& schedule)
{
    const bool wide = schedule.allow_overshoot;
    auto check = [wide](double d) {
        if (!control_in_range(d, wide))
            throw InvalidControl("control intensity " + std::to_string(d) + " outside admissible range");
    };
    if (const auto* c = std::get_if<ConstantControl>(&schedule.plan)) {
        check(c->d1);
        check(c->d2);
    } else if (const auto* s = std::get_if<SequenceControl>(&schedule.plan)) {
        if (s->values.empty())
            throw InvalidControl("sequence control needs at least one entry");
        for (const auto& [d1, d2] : s->values) {
            check(d1);
            check(d2);
        }
    } else {
        const auto& st = std::get<StochasticControl>(schedule.plan);
        if (!channel_admissible(st.ch1, wide) || !channel_admissible(st.ch2, wide))
            throw InvalidControl("stochastic channel violates alpha in [0,1), ell < min(alpha, 1 - alpha)");
    }
}

struct ControlStep {
    RngState rng;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Intensities for zero-based step `n`. Stochastic schedules always consume
/// two draws (channel 1 then channel 2), whatever the amplitudes.
inline ControlStep control_at_step(const ControlSchedule& schedule, std::size_t n, RngState rng)
{
    ControlStep out{rng};
    if (const auto* c = std::get_if<ConstantControl>(&schedule.plan)) {
        out.d1 = c->d1;
        out.d2 = c->d2;
    } else if (const auto* s = std::get_if<SequenceControl>(&schedule.plan)) {
        if (s->values.empty())
            throw InvalidControl("sequence control needs at least one entry");
        const auto& [d1, d2] = s->values[n % s->values.size()];
        out.d1 = d1;
        out.d2 = d2;
    } else {
        const auto& st = std::get<StochasticControl>(schedule.plan);
        const double chi1 = sample_noise(st.ch1.dist, out.rng);
        const double chi2 = sample_noise(st.ch2.dist, out.rng);
        out.d1 = st.ch1.alpha + st.ch1.ell * chi1;
        out.d2 = st.ch2.alpha + st.ch2.ell * chi2;
    }
    if (!control_in_range(out.d1, schedule.allow_overshoot) || !control_in_range(out.d2, schedule.allow_overshoot))
        throw InvalidControl("realized control (" + std::to_string(out.d1) + ", " + std::to_string(out.d2) +
                             ") outside admissible range");
    return out;
}

/// X' = U X* + (I - U) F(X) with U = diag(d1, d2).
template <typename Scalar>
Point2<Scalar> vmtoc_step(const MapParams<Scalar>& params, const Point2<Scalar>& target, Scalar d1, Scalar d2,
                          const Point2<Scalar>& p)
{
    const Point2<Scalar> f = map_step(params, p);
    return Point2<Scalar>(d1 * target.x() + (Scalar(1) - d1) * f.x(),
                          d2 * target.y() + (Scalar(1) - d2) * f.y());
}

} // namespace vmtoc
