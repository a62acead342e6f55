#include "vmtoc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "vmtoc/quadrature.hpp"

namespace vmtoc {

namespace {

constexpr double kAlphaTol = 1e-9;
constexpr double kEllTol = 1e-7;
constexpr double kQuadTol = 1e-10;

void require_beta(double beta)
{
    if (!(beta >= 0.0 && beta < 1.0))
        throw DomainError("beta must lie in [0, 1)");
}

// Smallest alpha with (1 - alpha) u + w < nu; -inf when any alpha works.
double affine_bound(double u, double w, double nu)
{
    if (!(w < nu))
        throw Unstabilizable("no alpha in [0,1) brings the norm below " + std::to_string(nu));
    if (u <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return 1.0 - (nu - w) / u;
}

double clamp_threshold(double alpha)
{
    return std::clamp(alpha, 0.0, std::nextafter(1.0, 0.0));
}

double uniform_log_mean(double c, double p)
{
    const double r = p / c;
    if (std::abs(r) < 1e-4) {
        double sum = std::log(c);
        double r2k = 1.0;
        for (int k = 1; k <= 4; ++k) {
            r2k *= r * r;
            sum -= r2k / (2.0 * k * (2.0 * k + 1.0));
        }
        return sum;
    }
    return ((c + p) * std::log(c + p) - (c - p) * std::log(c - p)) / (2.0 * p) - 1.0;
}

double single_log_mean(double c, double p, NoiseDist dist)
{
    if (dist == NoiseDist::BernoulliPM1)
        return 0.5 * std::log((c - p) * (c + p));
    return uniform_log_mean(c, p);
}

// Second antiderivative of ln s.
double log_antiderivative2(double s)
{
    return s * s * std::log(s) / 2.0 - 0.75 * s * s;
}

template <typename G>
double expect_over(NoiseDist dist, G&& g, double tol)
{
    if (dist == NoiseDist::BernoulliPM1)
        return 0.5 * (g(-1.0) + g(1.0));
    return 0.5 * adaptive_simpson(g, -1.0, 1.0, 2.0 * tol);
}

double quadrature_log_mean(const NuModel& m)
{
    if (m.q == 0.0)
        return expect_over(m.dist1, [&](double u) { return std::log(m.c + m.p * u); }, kQuadTol);
    if (m.p == 0.0)
        return expect_over(m.dist2, [&](double v) { return std::log(m.c + m.q * v); }, kQuadTol);
    auto inner = [&](double shift) {
        return expect_over(m.dist2, [&](double v) { return std::log(shift + m.q * v); }, kQuadTol * 1e-2);
    };
    return expect_over(m.dist1, [&](double u) { return inner(m.c + m.p * u); }, kQuadTol);
}

double closed_form_log_mean(const NuModel& m)
{
    const double c = m.c;
    const double p = m.p;
    const double q = m.q;
    if (p == 0.0 && q == 0.0)
        return std::log(c);
    if (q == 0.0)
        return single_log_mean(c, p, m.dist1);
    if (p == 0.0)
        return single_log_mean(c, q, m.dist2);

    const bool b1 = m.dist1 == NoiseDist::BernoulliPM1;
    const bool b2 = m.dist2 == NoiseDist::BernoulliPM1;
    if (b1 && b2)
        return 0.25 * (std::log((c - p - q) * (c + p + q)) + std::log((c - p + q) * (c + p - q)));
    if (b1)
        return 0.5 * (uniform_log_mean(c + p, q) + uniform_log_mean(c - p, q));
    if (b2)
        return 0.5 * (uniform_log_mean(c + q, p) + uniform_log_mean(c - q, p));
    // Both uniform: the elementary double integral cancels badly for small p q.
    if (std::min(std::abs(p), std::abs(q)) < 1e-2 * c)
        return quadrature_log_mean(m);
    const double num = log_antiderivative2(c + p + q) - log_antiderivative2(c + p - q) -
                       log_antiderivative2(c - p + q) + log_antiderivative2(c - p - q);
    return num / (4.0 * p * q);
}

void require_positive(const NuModel& m)
{
    if (!(m.c > std::abs(m.p) + std::abs(m.q)))
        throw DomainError("contraction model can be non-positive: c <= |p| + |q|");
}

} // namespace

double local_threshold(const MapParamsd& params, Branch branch, double beta)
{
    require_beta(beta);
    const Point2d star = fixed_point(params, branch);
    const Matrix2d jac = jacobian(params, star);
    // With j22 = 0: tr = (1-alpha) j11, det = -(1-alpha)(1-beta) j12 j21.
    const double coupling = (1.0 - beta) * jac(0, 1) * jac(1, 0);
    const double denom = std::abs(jac(0, 0)) + coupling;
    if (!(denom > 0.0))
        return 0.0;
    return clamp_threshold(1.0 - 1.0 / denom);
}

double norm_threshold(const MapParamsd& params, Branch branch, double radius, double beta, NormKind norm, double nu)
{
    require_beta(beta);
    if (!(nu > 0.0 && nu <= 1.0))
        throw DomainError("target contraction rate must lie in (0, 1]");
    const Matrix2d lip = lipschitz_matrix(params, branch, radius);
    const double keep_y = 1.0 - beta;

    switch (norm) {
    case NormKind::LInf: {
        const double row1 = affine_bound(lip(0, 0) + lip(0, 1), 0.0, nu);
        const double row2 = affine_bound(0.0, keep_y * (lip(1, 0) + lip(1, 1)), nu);
        return clamp_threshold(std::max(row1, row2));
    }
    case NormKind::L1: {
        const double col1 = affine_bound(lip(0, 0), keep_y * lip(1, 0), nu);
        const double col2 = affine_bound(lip(0, 1), keep_y * lip(1, 1), nu);
        return clamp_threshold(std::max(col1, col2));
    }
    case NormKind::L2Spectral: {
        auto norm_at = [&](double alpha) {
            return induced_norm(controlled(lip, alpha, beta), NormKind::L2Spectral);
        };
        if (!(norm_at(1.0) < nu))
            throw Unstabilizable("no alpha in [0,1) brings the spectral norm below " + std::to_string(nu));
        if (norm_at(0.0) < nu)
            return 0.0;
        double lo = 0.0;
        double hi = 1.0;
        while (hi - lo > kAlphaTol) {
            const double mid = 0.5 * (lo + hi);
            (norm_at(mid) < nu ? hi : lo) = mid;
        }
        return clamp_threshold(hi);
    }
    }
    return 0.0;
}

StabilityReport local_report(const MapParamsd& params, Branch branch, double beta)
{
    return {local_threshold(params, branch, beta), NormKind::L2Spectral, beta, 0.0, ThresholdMethod::TraceDet};
}

StabilityReport norm_report(const MapParamsd& params, Branch branch, double radius, double beta, NormKind norm)
{
    return {norm_threshold(params, branch, radius, beta, norm), norm, beta, radius, ThresholdMethod::NormBound};
}

RowControl per_row_control(double row1, double row2, double nu)
{
    if (!(row1 > 0.0) || !(row2 > 0.0))
        throw DomainError("row sums must be positive");
    if (!(nu > 0.0 && nu < 1.0))
        throw DomainError("contraction rate must lie in (0, 1)");
    return {std::max(1.0 - nu / row1, 0.0), std::max(1.0 - nu / row2, 0.0)};
}

bool bounded_noise_safe(double alpha, double ell, double alpha_star)
{
    return alpha > alpha_star && ell < std::min(alpha - alpha_star, 1.0 - alpha);
}

NuModel build_nu_model(const MapParamsd& params, Branch branch, double radius, NormKind norm,
                       const ControlChannel& ch1, const ControlChannel& ch2)
{
    if (norm == NormKind::L2Spectral)
        throw DomainError("spectral norm has no affine contraction model");
    const Matrix2d lip = lipschitz_matrix(params, branch, radius);
    const double k1 = lip(0, 0);
    const double b = lip(1, 0);

    NuModel m;
    m.dist1 = ch1.dist;
    m.dist2 = ch2.dist;
    if (norm == NormKind::LInf) {
        const double row1 = k1 + lip(0, 1);
        m.c = row1 * (1.0 - ch1.alpha);
        m.p = -row1 * ch1.ell;
        m.q = 0.0;
        // first row must dominate for every realization
        const double row2_max = b * std::max(std::abs(1.0 - ch2.alpha - ch2.ell), std::abs(1.0 - ch2.alpha + ch2.ell));
        m.regime_ok = row2_max < row1 * (1.0 - ch1.alpha - ch1.ell);
    } else {
        m.c = k1 * (1.0 - ch1.alpha) + b * (1.0 - ch2.alpha);
        m.p = -k1 * ch1.ell;
        m.q = -b * ch2.ell;
        // first column must dominate the second, (1 - d1) A12, for every realization
        const double excess = k1 - lip(0, 1);
        m.regime_ok = excess * (1.0 - ch1.alpha) - std::abs(excess) * ch1.ell + b * (1.0 - ch2.alpha) - b * ch2.ell >= 0.0;
    }
    return m;
}

double expected_log_nu(const NuModel& model, ExpectationMethod method)
{
    require_positive(model);
    if (!model.regime_ok)
        throw DomainError("single row/column reduction does not hold for these channels");
    switch (method.kind) {
    case ExpectationKind::ClosedForm: return closed_form_log_mean(model);
    case ExpectationKind::Quadrature: return quadrature_log_mean(model);
    case ExpectationKind::MonteCarlo: return sample_log_nu(model, method.samples, method.seed).mean;
    }
    return 0.0;
}

namespace {

template <typename Draw>
SampleEstimate welford(std::uint64_t samples, Draw&& draw)
{
    if (samples == 0)
        throw DomainError("sample count must be positive");
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double v = draw();
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
    const double sd = std::sqrt(var);
    return {mean, sd / std::sqrt(static_cast<double>(samples)), sd};
}

} // namespace

SampleEstimate sample_log_nu(const NuModel& model, std::uint64_t samples, std::uint64_t seed)
{
    require_positive(model);
    RngState rng = trial_stream(seed, 0);
    return welford(samples, [&] {
        const double chi1 = sample_noise(model.dist1, rng);
        const double chi2 = sample_noise(model.dist2, rng);
        return std::log(model.c + model.p * chi1 + model.q * chi2);
    });
}

SampleEstimate sample_log_row_max(const MapParamsd& params, Branch branch, double radius, const ControlChannel& ch1,
                                  const ControlChannel& ch2, std::uint64_t samples, std::uint64_t seed)
{
    const Matrix2d lip = lipschitz_matrix(params, branch, radius);
    const double row1 = lip(0, 0) + lip(0, 1);
    const double row2 = lip(1, 0) + lip(1, 1);
    RngState rng = trial_stream(seed, 0);
    return welford(samples, [&] {
        const double d1 = ch1.alpha + ch1.ell * sample_noise(ch1.dist, rng);
        const double d2 = ch2.alpha + ch2.ell * sample_noise(ch2.dist, rng);
        return std::log(std::max(row1 * std::abs(1.0 - d1), row2 * std::abs(1.0 - d2)));
    });
}

double min_noise_for_stability(const MinNoiseQuery& query)
{
    const double alpha = query.alpha1;
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha1 must lie in (0, 1)");
    const double ell_cap = std::min(alpha, 1.0 - alpha);

    auto model_at = [&](double ell) {
        return build_nu_model(query.params, query.branch, query.radius, query.norm,
                              ControlChannel{alpha, ell, query.dist1}, query.ch2);
    };
    auto usable = [](const NuModel& m) { return m.regime_ok && m.c > std::abs(m.p) + std::abs(m.q); };
    auto value = [&](double ell) { return expected_log_nu(model_at(ell)); };

    if (!usable(model_at(0.0)))
        throw DomainError("contraction model is invalid even without noise");
    if (value(0.0) < 0.0)
        return 0.0;

    // Both validity conditions shrink monotonically as ell grows.
    double top = ell_cap * (1.0 - 1e-12);
    if (!usable(model_at(top))) {
        double lo = 0.0;
        double hi = top;
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            (usable(model_at(mid)) ? lo : hi) = mid;
        }
        top = lo;
    }
    if (!(value(top) < 0.0))
        throw NoWindow("no admissible ell1 < " + std::to_string(ell_cap) + " makes E ln nu negative");

    double lo = 0.0;
    double hi = top;
    while (hi - lo > kEllTol) {
        const double mid = 0.5 * (lo + hi);
        (value(mid) < 0.0 ? hi : lo) = mid;
    }
    return hi;
}

} // namespace vmtoc
