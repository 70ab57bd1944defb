#pragma once

// Closed-form bound calculators: the Hoeffding-based instability lower bound
// for cube-supported laws, the Chebyshev bound for centered Gaussians, and the
// unit-ball / Gamma-ratio machinery behind the exponential-size stability
// region.
//
// Every quantity that depends on the dataset size n takes log n, so rules
// like n = b^d with d in the thousands never materialize n.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nnstab/distributions.hpp"
#include "nnstab/metric.hpp"

namespace nnstab {

/// Dataset size n(d): constant N, c * d^k, or b^d.
class DatasetSizeRule {
public:
    enum class Family { constant, polynomial, exponential };

    static DatasetSizeRule constant(double n);
    static DatasetSizeRule polynomial(double c, double k);
    static DatasetSizeRule exponential(double base);
    /// b = 4(1 + eps): the smallest base for which large-d queries stay stable.
    static DatasetSizeRule stability_threshold(Epsilon epsilon);

    Family family() const noexcept { return family_; }
    double a() const noexcept { return a_; }  // N, c, or b
    double k() const noexcept { return k_; }  // polynomial degree

    double log_n(std::size_t d) const;

    /// Integer size used by the estimators: the nearest integer when n(d) is
    /// integral to 1e-9 relative, otherwise ceil(n(d)). Throws
    /// std::overflow_error when n(d) does not fit in 64 bits.
    std::uint64_t realize(std::size_t d) const;

    bool operator==(const DatasetSizeRule&) const = default;

private:
    DatasetSizeRule(Family f, double a, double k) : family_(f), a_(a), k_(k) {}

    Family family_;
    double a_;
    double k_;
};

/// sum_j [q_j^(p+1) + (1 - q_j)^(p+1)] / (p + 1): the expected p-power
/// distance from q to a uniform point of the cube.
double gamma_uniform(std::span<const double> query, PNorm p);

/// min(1, 2 beta exp(-2 delta^2 d / ((p+1)^2 4^p))).
double hoeffding_deviation_bound(std::size_t d, PNorm p, Epsilon epsilon, double beta_value);

/// max(0, 1 - tail)^n evaluated as exp(n log1p(-tail)) with n = exp(log_n).
double instability_lower_bound_from_tail(double tail, double log_n);

double instability_probability_lower_bound(std::size_t d, const DatasetSizeRule& size_rule,
                                           PNorm p, Epsilon epsilon, double beta_value);

/// min(1, 2 sum lambda^4 / (delta(eps,2)^2 (sum lambda^2)^2)) for a centered
/// Gaussian queried at the origin with p = 2.
double chebyshev_gaussian_deviation_bound(std::span<const double> stddev, Epsilon epsilon);

double gaussian_instability_lower_bound(std::span<const double> stddev,
                                        const DatasetSizeRule& size_rule, Epsilon epsilon,
                                        std::size_t d);

/// log V_{d,p} = d log(2 Gamma(1 + 1/p)) - log Gamma(1 + d/p).
double log_unit_ball_volume(std::size_t d, PNorm p);

struct BallVolumeLimit {
    double value;  // d^(1/p) V_{d,p}^(1/d)
    double limit;  // 2 (e p)^(1/p)
};

BallVolumeLimit ball_volume_limit_check(std::size_t d, PNorm p);

/// log Gamma(z + a) - log Gamma(z) for z = exp(log_z) > 0 and 0 <= a <= 1.
/// Direct log-gamma differences for small z; a Stirling-series difference
/// once cancellation would dominate; a log z when z overflows a double.
double log_gamma_ratio(double log_z, double a);

/// Asymptotic lower bound on E[Z] / d^(1/p) for n = exp(log_n) points and a
/// law with squared L2 norm `l2_norm_squared`. The little-o remainder of the
/// expansion is dropped, so the value is only meaningful for large d.
double ez_ratio_lower_bound(std::size_t d, PNorm p, Epsilon epsilon, double log_n,
                            double l2_norm_squared);

inline constexpr double kDefaultZeta = 0.995;

void require_zeta(double zeta);

/// [1 / (zeta beta)] [ez_ratio + zeta - 1], clamped below at 0.
double stable_volume_lower_bound(double ez_ratio, double zeta, double beta_value);

/// log(omega^d / volume_lower); -infinity when omega == 0.
double largeness_ratio(double omega, std::size_t d, double volume_lower);

struct BoundReport {
    // inputs
    std::size_t d = 0;
    double log_n = 0.0;
    double p = 0.0;
    double epsilon = 0.0;
    double beta = 0.0;
    double zeta = kDefaultZeta;
    std::optional<double> omega;
    std::string method;  // "hoeffding" or "chebyshev"

    double delta_value = 0.0;
    double gamma = 0.0;
    double deviation_bound = 0.0;
    double instability_lower_bound = 0.0;
    std::optional<double> ez_ratio_bound;  // asymptotic
    std::optional<double> stable_volume_bound;
    std::optional<double> log_largeness;

    bool deviation_clamped = false;
    bool instability_clamped = false;
    bool volume_clamped = false;
};

struct BoundInputs {
    const DistributionSpec& spec;
    const DatasetSizeRule& size_rule;
    PNorm p;
    Epsilon epsilon;
    std::span<const double> query;
    std::optional<double> beta;  // defaults to density_sup(spec)
    double zeta = kDefaultZeta;
    std::optional<double> omega;
};

/// Every closed-form quantity for one configuration. Cube-supported laws get
/// the Hoeffding chain (plus the stability-region quantities when p >= 1);
/// Gaussians get the Chebyshev chain and require p = 2, zero mean and a query
/// at the origin.
BoundReport make_bound_report(const BoundInputs& in);

}  // namespace nnstab
