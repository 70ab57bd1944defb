#include "nnstab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nnstab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_dimension(std::size_t d) {
    if (d == 0) throw std::invalid_argument("dimension must be >= 1");
}

void require_cube(const DistributionSpec& spec, const char* what) {
    if (!spec.cube_supported())
        throw std::domain_error(std::string(what) +
                                " is only defined for cube-supported laws (got gaussian)");
}

}  // namespace

DistributionSpec DistributionSpec::uniform_cube(std::size_t d) {
    check_dimension(d);
    return DistributionSpec(d, UniformCube{});
}

DistributionSpec DistributionSpec::slab_mixture(std::size_t d, double weight, std::size_t axis) {
    check_dimension(d);
    if (!(weight >= 0.0 && weight <= 1.0))
        throw std::invalid_argument("slab weight must lie in [0, 1]");
    if (axis >= d)
        throw std::invalid_argument("slab axis " + std::to_string(axis) +
                                    " out of range for dimension " + std::to_string(d));
    return DistributionSpec(d, SlabMixture{weight, axis});
}

DistributionSpec DistributionSpec::gaussian(std::vector<double> mean, std::vector<double> stddev) {
    check_dimension(stddev.size());
    if (mean.size() != stddev.size())
        throw std::invalid_argument("gaussian mean and stddev spectrum differ in length");
    for (double m : mean)
        if (!std::isfinite(m)) throw std::invalid_argument("gaussian mean must be finite");
    for (double s : stddev)
        if (!std::isfinite(s) || s < 0.0)
            throw std::invalid_argument("gaussian stddev entries must be finite and >= 0");
    if (!std::is_sorted(stddev.begin(), stddev.end(), std::greater<>()))
        throw std::invalid_argument("gaussian stddev spectrum must be sorted descending");
    const std::size_t d = stddev.size();
    return DistributionSpec(d, GaussianEllipsoid{std::move(mean), std::move(stddev)});
}

std::string_view DistributionSpec::family_name() const noexcept {
    return std::visit(overloaded{[](const UniformCube&) { return std::string_view("uniform-cube"); },
                                 [](const SlabMixture&) { return std::string_view("slab-mixture"); },
                                 [](const GaussianEllipsoid&) { return std::string_view("gaussian"); }},
                      variant_);
}

void sample(const DistributionSpec& spec, Stream& stream, std::span<double> out) {
    const std::size_t d = spec.dimension();
    if (out.size() != d) throw std::invalid_argument("sample buffer has wrong dimension");
    std::visit(overloaded{
                   [&](const UniformCube&) {
                       for (std::size_t j = 0; j < d; ++j) out[j] = stream.uniform();
                   },
                   [&](const SlabMixture& s) {
                       const bool in_slab = stream.uniform() < s.weight;
                       for (std::size_t j = 0; j < d; ++j) out[j] = stream.uniform();
                       if (in_slab) out[s.axis] /= static_cast<double>(d);
                   },
                   [&](const GaussianEllipsoid& g) {
                       for (std::size_t j = 0; j < d; ++j)
                           out[j] = g.mean[j] + g.stddev[j] * stream.normal();
                   }},
               spec.variant());
}

std::vector<double> sample(const DistributionSpec& spec, Stream& stream) {
    std::vector<double> out(spec.dimension());
    sample(spec, stream, out);
    return out;
}

double density(const DistributionSpec& spec, std::span<const double> point) {
    const std::size_t d = spec.dimension();
    if (point.size() != d) throw std::invalid_argument("point dimension does not match the distribution");
    auto in_cube = [&] {
        return std::all_of(point.begin(), point.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    };
    return std::visit(
        overloaded{[&](const UniformCube&) { return in_cube() ? 1.0 : 0.0; },
                   [&](const SlabMixture& s) {
                       if (!in_cube()) return 0.0;
                       const double base = 1.0 - s.weight;
                       const bool in_slab = point[s.axis] <= 1.0 / static_cast<double>(d);
                       return in_slab ? base + s.weight * static_cast<double>(d) : base;
                   },
                   [&](const GaussianEllipsoid& g) {
                       double log_f = 0.0;
                       for (std::size_t j = 0; j < d; ++j) {
                           const double sd = g.stddev[j];
                           if (sd == 0.0)
                               throw std::domain_error(
                                   "gaussian density undefined with a zero stddev entry");
                           const double u = (point[j] - g.mean[j]) / sd;
                           log_f += -0.5 * u * u - std::log(sd) -
                                    0.5 * std::log(2.0 * std::numbers::pi);
                       }
                       return std::exp(log_f);
                   }},
        spec.variant());
}

double density_sup(const DistributionSpec& spec) {
    require_cube(spec, "density_sup");
    if (const auto* s = std::get_if<SlabMixture>(&spec.variant()))
        return (1.0 - s->weight) + s->weight * static_cast<double>(spec.dimension());
    return 1.0;
}

double l2_density_norm_squared(const DistributionSpec& spec) {
    require_cube(spec, "l2_density_norm_squared");
    if (const auto* s = std::get_if<SlabMixture>(&spec.variant())) {
        const double d = static_cast<double>(spec.dimension());
        const double base = 1.0 - s->weight;
        const double peak = base + s->weight * d;
        return (1.0 - 1.0 / d) * base * base + (1.0 / d) * peak * peak;
    }
    return 1.0;
}

SquaredNormMoments gaussian_squared_norm_moments(std::span<const double> stddev) {
    double sum2 = 0.0;
    double sum4 = 0.0;
    for (double s : stddev) {
        const double v = s * s;
        sum2 += v;
        sum4 += v * v;
    }
    return {sum2, 2.0 * sum4};
}

DensityBoundRule DensityBoundRule::constant(double c) {
    if (!std::isfinite(c) || !(c > 0.0))
        throw std::invalid_argument("density bound constant must be > 0");
    return DensityBoundRule(Family::constant, c, 0.0);
}

DensityBoundRule DensityBoundRule::polynomial(double c, double k) {
    if (!std::isfinite(c) || !(c > 0.0))
        throw std::invalid_argument("density bound coefficient must be > 0");
    if (!std::isfinite(k) || k < 0.0)
        throw std::invalid_argument("density bound degree must be >= 0");
    return DensityBoundRule(Family::polynomial, c, k);
}

double DensityBoundRule::log_value(std::size_t d) const {
    check_dimension(d);
    if (family_ == Family::constant) return std::log(c_);
    return std::log(c_) + k_ * std::log(static_cast<double>(d));
}

double DensityBoundRule::operator()(std::size_t d) const {
    check_dimension(d);
    if (family_ == Family::constant) return c_;
    return c_ * std::pow(static_cast<double>(d), k_);
}

std::vector<std::vector<double>> realize_queries(const QuerySpec& query,
                                                 const DistributionSpec& spec, Stream& stream) {
    const std::size_t d = spec.dimension();
    const auto* gauss = std::get_if<GaussianEllipsoid>(&spec.variant());
    return std::visit(
        overloaded{
            [&](const CenterQuery&) {
                return std::vector<std::vector<double>>{gauss ? gauss->mean
                                                              : std::vector<double>(d, 0.5)};
            },
            [&](const CornerQuery&) {
                return std::vector<std::vector<double>>{std::vector<double>(d, 0.0)};
            },
            [&](const UniformRandomQueries& r) {
                if (r.count == 0) throw std::invalid_argument("random query count must be >= 1");
                std::vector<std::vector<double>> out;
                out.reserve(r.count);
                const auto cube = DistributionSpec::uniform_cube(d);
                for (std::size_t i = 0; i < r.count; ++i)
                    out.push_back(sample(gauss ? spec : cube, stream));
                return out;
            },
            [&](const ExplicitQueries& e) {
                if (e.points.empty()) throw std::invalid_argument("explicit query list is empty");
                for (const auto& q : e.points) {
                    if (q.size() != d)
                        throw std::invalid_argument("explicit query has dimension " +
                                                    std::to_string(q.size()) + ", expected " +
                                                    std::to_string(d));
                    for (double v : q) {
                        if (!std::isfinite(v))
                            throw std::invalid_argument("explicit query is not finite");
                        if (!gauss && (v < 0.0 || v > 1.0))
                            throw std::invalid_argument(
                                "explicit query lies outside the support [0,1]^d");
                    }
                }
                return e.points;
            }},
        query);
}

}  // namespace nnstab
