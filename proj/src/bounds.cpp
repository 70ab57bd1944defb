#include "nnstab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nnstab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_dimension(std::size_t d) {
    if (d == 0) throw std::invalid_argument("dimension must be >= 1");
}

void require_beta(double beta) {
    if (!std::isfinite(beta) || !(beta > 0.0))
        throw std::invalid_argument("density bound beta must be finite and > 0");
}

double hoeffding_tail_raw(std::size_t d, PNorm p, Epsilon epsilon, double beta) {
    const double dv = delta(epsilon, p);
    const double pp = p.value();
    const double scale = (pp + 1.0) * (pp + 1.0) * std::exp(pp * std::log(4.0));
    return 2.0 * beta * std::exp(-2.0 * dv * dv * static_cast<double>(d) / scale);
}

double chebyshev_tail_raw(std::span<const double> stddev, Epsilon epsilon) {
    double sum2 = 0.0;
    double sum4 = 0.0;
    for (double s : stddev) {
        if (!std::isfinite(s) || s < 0.0)
            throw std::invalid_argument("stddev entries must be finite and >= 0");
        const double v = s * s;
        sum2 += v;
        sum4 += v * v;
    }
    if (!(sum2 > 0.0)) throw std::invalid_argument("stddev spectrum is identically zero");
    const double dv = delta(epsilon, PNorm(2.0));
    return 2.0 * sum4 / (dv * dv * sum2 * sum2);
}

double stirling_tail(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

double log_n_plus_one(double log_n) { return log_n + std::log1p(std::exp(-log_n)); }

}  // namespace

DatasetSizeRule DatasetSizeRule::constant(double n) {
    if (!std::isfinite(n) || n < 1.0) throw std::invalid_argument("constant dataset size must be >= 1");
    return DatasetSizeRule(Family::constant, n, 0.0);
}

DatasetSizeRule DatasetSizeRule::polynomial(double c, double k) {
    if (!std::isfinite(c) || !(c > 0.0))
        throw std::invalid_argument("polynomial size coefficient must be > 0");
    if (!std::isfinite(k) || k < 0.0) throw std::invalid_argument("polynomial size degree must be >= 0");
    return DatasetSizeRule(Family::polynomial, c, k);
}

DatasetSizeRule DatasetSizeRule::exponential(double base) {
    if (!std::isfinite(base) || !(base > 1.0))
        throw std::invalid_argument("exponential size base must be > 1");
    return DatasetSizeRule(Family::exponential, base, 0.0);
}

DatasetSizeRule DatasetSizeRule::stability_threshold(Epsilon epsilon) {
    return exponential(4.0 * (1.0 + epsilon.value()));
}

double DatasetSizeRule::log_n(std::size_t d) const {
    require_dimension(d);
    const double dd = static_cast<double>(d);
    switch (family_) {
        case Family::constant: return std::log(a_);
        case Family::polynomial: return std::max(0.0, std::log(a_) + k_ * std::log(dd));
        case Family::exponential: return dd * std::log(a_);
    }
    return kNaN;
}

std::uint64_t DatasetSizeRule::realize(std::size_t d) const {
    require_dimension(d);
    const double dd = static_cast<double>(d);
    double v = 0.0;
    switch (family_) {
        case Family::constant: v = a_; break;
        case Family::polynomial: v = a_ * std::pow(dd, k_); break;
        case Family::exponential: v = std::pow(a_, dd); break;
    }
    if (!(v < 1.8e19)) throw std::overflow_error("dataset size n(d) does not fit in 64 bits");
    const double r = std::round(v);
    const double n = std::abs(v - r) <= 1e-9 * v ? r : std::ceil(v);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

double gamma_uniform(std::span<const double> query, PNorm p) {
    if (query.empty()) throw std::invalid_argument("query must have dimension >= 1");
    const double e = p.value() + 1.0;
    CompensatedSum sum;
    for (double q : query) {
        if (!(q >= 0.0 && q <= 1.0))
            throw std::invalid_argument("query coordinate outside [0,1]");
        sum.add((std::pow(q, e) + std::pow(1.0 - q, e)) / e);
    }
    return sum.value();
}

double hoeffding_deviation_bound(std::size_t d, PNorm p, Epsilon epsilon, double beta_value) {
    require_dimension(d);
    require_beta(beta_value);
    return std::min(1.0, hoeffding_tail_raw(d, p, epsilon, beta_value));
}

double instability_lower_bound_from_tail(double tail, double log_n) {
    if (std::isnan(tail) || std::isnan(log_n)) throw std::invalid_argument("NaN bound input");
    if (log_n < 0.0) throw std::invalid_argument("dataset size must be >= 1");
    if (tail >= 1.0) return 0.0;
    if (tail <= 0.0) return 1.0;
    // n * log1p(-tail) = -exp(log_n + log(-log1p(-tail)))
    const double log_neg = log_n + std::log(-std::log1p(-tail));
    return std::exp(-std::exp(log_neg));
}

double instability_probability_lower_bound(std::size_t d, const DatasetSizeRule& size_rule,
                                           PNorm p, Epsilon epsilon, double beta_value) {
    return instability_lower_bound_from_tail(hoeffding_deviation_bound(d, p, epsilon, beta_value),
                                             size_rule.log_n(d));
}

double chebyshev_gaussian_deviation_bound(std::span<const double> stddev, Epsilon epsilon) {
    return std::min(1.0, chebyshev_tail_raw(stddev, epsilon));
}

double gaussian_instability_lower_bound(std::span<const double> stddev,
                                        const DatasetSizeRule& size_rule, Epsilon epsilon,
                                        std::size_t d) {
    if (stddev.size() != d) throw std::invalid_argument("stddev spectrum length differs from d");
    return instability_lower_bound_from_tail(chebyshev_gaussian_deviation_bound(stddev, epsilon),
                                             size_rule.log_n(d));
}

double log_unit_ball_volume(std::size_t d, PNorm p) {
    require_dimension(d);
    const double pp = p.value();
    const double dd = static_cast<double>(d);
    return dd * (std::numbers::ln2 + std::lgamma(1.0 + 1.0 / pp)) - std::lgamma(1.0 + dd / pp);
}

BallVolumeLimit ball_volume_limit_check(std::size_t d, PNorm p) {
    p.require_at_least_one();
    const double pp = p.value();
    const double dd = static_cast<double>(d);
    const double value = std::exp(std::log(dd) / pp + log_unit_ball_volume(d, p) / dd);
    const double limit = 2.0 * std::exp((1.0 + std::log(pp)) / pp);
    return {value, limit};
}

double log_gamma_ratio(double log_z, double a) {
    if (std::isnan(log_z)) throw std::invalid_argument("log_gamma_ratio: NaN argument");
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("log_gamma_ratio: a must lie in [0,1]");
    if (log_z > 700.0) return a * log_z;  // remaining terms are O(1/z) with z > 1e304
    const double z = std::exp(log_z);
    if (z < 1e4) return std::lgamma(z + a) - std::lgamma(z);
    return a * log_z + (z + a - 0.5) * std::log1p(a / z) - a + stirling_tail(z + a) -
           stirling_tail(z);
}

double ez_ratio_lower_bound(std::size_t d, PNorm p, Epsilon epsilon, double log_n,
                            double l2_norm_squared) {
    require_dimension(d);
    p.require_at_least_one();
    if (!std::isfinite(log_n) || log_n < 0.0)
        throw std::invalid_argument("log n must be finite and >= 0");
    if (!std::isfinite(l2_norm_squared) || !(l2_norm_squared > 0.0))
        throw std::invalid_argument("squared L2 density norm must be > 0");

    const double dd = static_cast<double>(d);
    const double inv_d = 1.0 / dd;
    const double log_np1 = log_n_plus_one(log_n);
    const double log_scale = std::log(dd) / p.value() + log_unit_ball_volume(d, p) * inv_d;

    // Gamma(n + 1/d) Gamma(n + 1) / (Gamma(n) Gamma(n + 1 + 1/d))
    const double log_gamma_factor = log_gamma_ratio(log_n, inv_d) - log_gamma_ratio(log_np1, inv_d);
    const double log_term1 = log_gamma_factor - log_scale - 0.5 * std::log(3.0) -
                             inv_d * std::numbers::ln2 - 0.5 * inv_d -
                             inv_d * std::log(l2_norm_squared);
    const double log_term2 =
        std::log(2.0 * (1.0 + epsilon.value())) - log_scale - inv_d * log_np1;
    return std::exp(log_term1) - std::exp(log_term2);
}

void require_zeta(double zeta) {
    if (!(zeta > 0.99 && zeta < 1.0))
        throw std::invalid_argument("zeta must satisfy 99/100 < zeta < 1, got " +
                                    std::to_string(zeta));
}

double stable_volume_lower_bound(double ez_ratio, double zeta, double beta_value) {
    require_zeta(zeta);
    require_beta(beta_value);
    if (std::isnan(ez_ratio)) throw std::invalid_argument("ez_ratio is NaN");
    return std::max(0.0, (ez_ratio + zeta - 1.0) / (zeta * beta_value));
}

double largeness_ratio(double omega, std::size_t d, double volume_lower) {
    require_dimension(d);
    if (!(omega >= 0.0 && omega < 1.0)) throw std::invalid_argument("omega must lie in [0, 1)");
    if (!(volume_lower > 0.0)) throw std::invalid_argument("volume lower bound must be > 0");
    if (omega == 0.0) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(d) * std::log(omega) - std::log(volume_lower);
}

BoundReport make_bound_report(const BoundInputs& in) {
    const std::size_t d = in.spec.dimension();
    if (in.query.size() != d) throw std::invalid_argument("query dimension does not match the distribution");

    BoundReport r;
    r.d = d;
    r.log_n = in.size_rule.log_n(d);
    r.p = in.p.value();
    r.epsilon = in.epsilon.value();
    r.zeta = in.zeta;
    r.omega = in.omega;
    require_zeta(in.zeta);

    if (const auto* g = std::get_if<GaussianEllipsoid>(&in.spec.variant())) {
        if (in.p.value() != 2.0)
            throw std::domain_error("the gaussian bound chain is only defined for p = 2");
        auto zero = [](double v) { return v == 0.0; };
        if (!std::all_of(g->mean.begin(), g->mean.end(), zero))
            throw std::domain_error("the gaussian bound chain requires a zero mean");
        if (!std::all_of(in.query.begin(), in.query.end(), zero))
            throw std::domain_error("the gaussian bound chain requires a query at the origin");
        r.method = "chebyshev";
        r.beta = kNaN;
        r.delta_value = delta(in.epsilon, in.p);
        r.gamma = gaussian_squared_norm_moments(g->stddev).mean;
        const double raw = chebyshev_tail_raw(g->stddev, in.epsilon);
        r.deviation_bound = std::min(1.0, raw);
        r.deviation_clamped = raw > 1.0;
        r.instability_lower_bound = instability_lower_bound_from_tail(r.deviation_bound, r.log_n);
        r.instability_clamped = r.deviation_bound >= 1.0;
        return r;
    }

    r.method = "hoeffding";
    r.beta = in.beta.value_or(density_sup(in.spec));
    require_beta(r.beta);
    r.delta_value = delta(in.epsilon, in.p);
    r.gamma = gamma_uniform(in.query, in.p);
    const double raw = hoeffding_tail_raw(d, in.p, in.epsilon, r.beta);
    r.deviation_bound = std::min(1.0, raw);
    r.deviation_clamped = raw > 1.0;
    r.instability_lower_bound = instability_lower_bound_from_tail(r.deviation_bound, r.log_n);
    r.instability_clamped = r.deviation_bound >= 1.0;

    if (in.p.value() >= 1.0) {
        const double ez =
            ez_ratio_lower_bound(d, in.p, in.epsilon, r.log_n, l2_density_norm_squared(in.spec));
        r.ez_ratio_bound = ez;
        const double vol_raw = (ez + in.zeta - 1.0) / (in.zeta * r.beta);
        r.stable_volume_bound = std::max(0.0, vol_raw);
        r.volume_clamped = vol_raw < 0.0;
        if (in.omega && *r.stable_volume_bound > 0.0)
            r.log_largeness = largeness_ratio(*in.omega, d, *r.stable_volume_bound);
    }
    return r;
}

}  // namespace nnstab
