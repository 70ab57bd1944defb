#pragma once

// p-norm geometry and the instability predicates shared by the bound
// calculators and the Monte Carlo estimators.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace nnstab {

/// Exponent of the p-norm distance. Any p > 0 is a valid distance exponent;
/// results that need the triangle inequality call require_at_least_one().
class PNorm {
public:
    explicit PNorm(double p);

    double value() const noexcept { return p_; }
    void require_at_least_one() const;

private:
    double p_;
};

/// Relative-contrast slack: a query is unstable when max <= (1 + eps) * min.
class Epsilon {
public:
    explicit Epsilon(double value);

    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Distances of the dataset points to one query. Nonempty, all >= 0.
class DistanceSet {
public:
    explicit DistanceSet(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

private:
    std::vector<double> values_;
    double min_;
    double max_;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

namespace detail {

inline double abs_power(double v, double p) noexcept {
    const double a = std::abs(v);
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    return std::pow(a, p);
}

/// Unchecked inner kernel for sum_j |x_j - y_j|^p.
inline double power_sum_unchecked(const double* x, const double* y, std::size_t d,
                                  double p) noexcept {
    CompensatedSum acc;
    for (std::size_t j = 0; j < d; ++j) acc.add(abs_power(x[j] - y[j], p));
    return acc.value();
}

}  // namespace detail

/// sum_j |x_j - y_j|^p, accumulated with compensated summation.
double p_power_sum(std::span<const double> x, std::span<const double> y, PNorm p);

/// (sum_j |x_j - y_j|^p)^(1/p).
double p_distance(std::span<const double> x, std::span<const double> y, PNorm p);

/// Inverse of the power sum: s^(1/p), monotone in s for every p > 0.
inline double root_of_power_sum(double s, double p) noexcept {
    if (p == 1.0) return s;
    if (p == 2.0) return std::sqrt(s);
    return std::pow(s, 1.0 / p);
}

/// Band half-width ((1+eps)^p - 1) / ((1+eps)^p + 1), evaluated through expm1
/// so that eps down to 1e-12 keeps full relative precision.
double delta(Epsilon epsilon, PNorm p);

/// max <= (1 + eps) * min. The boundary case counts as unstable.
inline bool is_unstable(double d_min, double d_max, double epsilon) noexcept {
    return d_max <= (1.0 + epsilon) * d_min;
}

/// max - (1 + eps) * min. Uses the same rounded threshold as is_unstable, so
/// z < 0 implies unstable and z == 0 is the shared tie.
inline double z_value(double d_min, double d_max, double epsilon) noexcept {
    return d_max - (1.0 + epsilon) * d_min;
}

bool instability_event(const DistanceSet& dists, Epsilon epsilon);
double z_statistic(const DistanceSet& dists, Epsilon epsilon);

/// True iff every p-th power distance s satisfies |s - gamma| <= gamma * delta,
/// evaluated as gamma(1 - delta) <= s <= gamma(1 + delta).
bool band_check(std::span<const double> p_power_dists, double gamma, double delta_value);

}  // namespace nnstab
