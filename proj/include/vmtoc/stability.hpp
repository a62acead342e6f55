#pragma once

#include <cstdint>

#include "vmtoc/control.hpp"
#include "vmtoc/linalg2.hpp"
#include "vmtoc/maps.hpp"

namespace vmtoc {

using MapParamsd = MapParams<double>;

// ---------------------------------------------------------------------------
// Deterministic thresholds

/// (I - U) M with U = diag(d1, d2).
inline Matrix2d controlled(const Matrix2d& m, double d1, double d2)
{
    return Eigen::Vector2d(1.0 - d1, 1.0 - d2).asDiagonal() * m;
}

/// Critical x-control alpha* for constant control diag(alpha, beta): the
/// controlled Jacobian at the equilibrium has both eigenvalues inside the
/// unit circle for every alpha > alpha*. Clamped to [0, 1).
double local_threshold(const MapParamsd& params, Branch branch, double beta);

/// Infimum alpha* such that ||(I - U) A|| < nu for every alpha in (alpha*, 1),
/// where A is the Lipschitz matrix on the ball of radius R. nu = 1 gives the
/// limit nu* -> 1-. Spectral thresholds are bisected to 1e-9.
double norm_threshold(const MapParamsd& params, Branch branch, double radius, double beta, NormKind norm,
                      double nu = 1.0);

enum class ThresholdMethod { TraceDet, NormBound };

struct StabilityReport {
    double threshold = 0.0;
    NormKind norm = NormKind::LInf;
    double beta = 0.0;
    double radius = 0.0;
    ThresholdMethod method = ThresholdMethod::TraceDet;
};

StabilityReport local_report(const MapParamsd& params, Branch branch, double beta);
StabilityReport norm_report(const MapParamsd& params, Branch branch, double radius, double beta, NormKind norm);

struct RowControl {
    double d1 = 0.0;
    double d2 = 0.0;
};

/// d_i = max(1 - nu / L_i, 0), so that (1 - d_i) L_i <= nu for each row.
RowControl per_row_control(double row1, double row2, double nu);

/// Worst-case noise keeps the control above the deterministic bound:
/// alpha > alpha* and ell < min(alpha - alpha*, 1 - alpha).
bool bounded_noise_safe(double alpha, double ell, double alpha_star);

// ---------------------------------------------------------------------------
// Stochastic analysis

/// Affine contraction factor nu = c + p chi1 + q chi2.
struct NuModel {
    double c = 1.0;
    double p = 0.0;
    double q = 0.0;
    NoiseDist dist1 = NoiseDist::BernoulliPM1;
    NoiseDist dist2 = NoiseDist::BernoulliPM1;
    bool regime_ok = true;
};

/// Builds the l-infinity (first row) or l1 (first column) contraction model.
/// Spectral norms have no affine representation and raise DomainError.
NuModel build_nu_model(const MapParamsd& params, Branch branch, double radius, NormKind norm,
                       const ControlChannel& ch1, const ControlChannel& ch2);

enum class ExpectationKind { ClosedForm, Quadrature, MonteCarlo };

struct ExpectationMethod {
    ExpectationKind kind = ExpectationKind::ClosedForm;
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
};

/// E ln(c + p chi1 + q chi2). Throws DomainError when nu can be non-positive
/// or the row/column reduction does not hold.
double expected_log_nu(const NuModel& model, ExpectationMethod method = {});

struct SampleEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double std_dev = 0.0;
};

/// Monte Carlo mean of ln nu with its standard error.
SampleEstimate sample_log_nu(const NuModel& model, std::uint64_t samples, std::uint64_t seed);

/// Diagnostic outside the closed forms: Monte Carlo estimate of
/// E ln max(row1, row2) of the controlled l-infinity Lipschitz bound. Valid
/// also when the single-row reduction fails.
SampleEstimate sample_log_row_max(const MapParamsd& params, Branch branch, double radius, const ControlChannel& ch1,
                                  const ControlChannel& ch2, std::uint64_t samples, std::uint64_t seed);

struct MinNoiseQuery {
    MapParamsd params;
    Branch branch = Branch::Plus;
    double radius = 0.0;
    NormKind norm = NormKind::LInf;
    double alpha1 = 0.5;
    NoiseDist dist1 = NoiseDist::BernoulliPM1;
    ControlChannel ch2;
};

/// Smallest ell1 in [0, min(alpha1, 1 - alpha1)) with E ln nu < 0, to 1e-6.
/// Throws NoWindow when no admissible amplitude works.
double min_noise_for_stability(const MinNoiseQuery& query);

} // namespace vmtoc
