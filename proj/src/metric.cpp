#include "nnstab/metric.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace nnstab {

PNorm::PNorm(double p) : p_(p) {
    if (!std::isfinite(p) || !(p > 0.0))
        throw std::invalid_argument("p-norm exponent must be finite and > 0, got " +
                                    std::to_string(p));
}

void PNorm::require_at_least_one() const {
    if (p_ < 1.0)
        throw std::invalid_argument("this quantity requires p >= 1, got " + std::to_string(p_));
}

Epsilon::Epsilon(double value) : value_(value) {
    if (!std::isfinite(value) || !(value > 0.0))
        throw std::invalid_argument("epsilon must be finite and > 0, got " +
                                    std::to_string(value));
}

DistanceSet::DistanceSet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("distance set is empty");
    for (double v : values_)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("distances must be finite and >= 0");
    const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    min_ = *lo;
    max_ = *hi;
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("dimension mismatch: " + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
    if (x.empty()) throw std::invalid_argument("points must have dimension >= 1");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite))
        throw std::invalid_argument("non-finite coordinate");
}

}  // namespace

double p_power_sum(std::span<const double> x, std::span<const double> y, PNorm p) {
    check_pair(x, y);
    return detail::power_sum_unchecked(x.data(), y.data(), x.size(), p.value());
}

double p_distance(std::span<const double> x, std::span<const double> y, PNorm p) {
    return root_of_power_sum(p_power_sum(x, y, p), p.value());
}

double delta(Epsilon epsilon, PNorm p) {
    // (1+eps)^p - 1 without cancellation.
    const double grow = std::expm1(p.value() * std::log1p(epsilon.value()));
    return grow / (grow + 2.0);
}

bool instability_event(const DistanceSet& dists, Epsilon epsilon) {
    return is_unstable(dists.min(), dists.max(), epsilon.value());
}

double z_statistic(const DistanceSet& dists, Epsilon epsilon) {
    return z_value(dists.min(), dists.max(), epsilon.value());
}

bool band_check(std::span<const double> p_power_dists, double gamma, double delta_value) {
    const double lo = gamma * (1.0 - delta_value);
    const double hi = gamma * (1.0 + delta_value);
    return std::all_of(p_power_dists.begin(), p_power_dists.end(),
                       [&](double s) { return lo <= s && s <= hi; });
}

}  // namespace nnstab
