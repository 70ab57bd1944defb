#pragma once

// Data-generating laws f_d: samplers, exact densities, density suprema and
// L2 norms for the uniform cube, the slab mixture and the axis-aligned
// Gaussian ellipsoid.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "nnstab/random.hpp"

namespace nnstab {

struct UniformCube {
    bool operator==(const UniformCube&) const = default;
};

/// Mixture of the uniform cube (weight 1 - w) and a uniform slab
/// {y : y_axis in [0, 1/d]} (weight w). Axis is 0-based.
struct SlabMixture {
    double weight = 0.0;
    std::size_t axis = 0;
    bool operator==(const SlabMixture&) const = default;
};

/// mean + sum_j stddev_j * g_j * e_j with g_j standard normal. Stddevs are
/// sorted descending; zero entries give degenerate (point-mass) axes.
struct GaussianEllipsoid {
    std::vector<double> mean;
    std::vector<double> stddev;
    bool operator==(const GaussianEllipsoid&) const = default;
};

class DistributionSpec {
public:
    using Variant = std::variant<UniformCube, SlabMixture, GaussianEllipsoid>;

    static DistributionSpec uniform_cube(std::size_t d);
    static DistributionSpec slab_mixture(std::size_t d, double weight, std::size_t axis);
    static DistributionSpec gaussian(std::vector<double> mean, std::vector<double> stddev);

    std::size_t dimension() const noexcept { return d_; }
    const Variant& variant() const noexcept { return variant_; }
    bool cube_supported() const noexcept { return !std::holds_alternative<GaussianEllipsoid>(variant_); }
    std::string_view family_name() const noexcept;

    bool operator==(const DistributionSpec&) const = default;

private:
    DistributionSpec(std::size_t d, Variant v) : d_(d), variant_(std::move(v)) {}

    std::size_t d_;
    Variant variant_;
};

/// Writes one draw into `out` (size d). Draw count per point is fixed by the
/// spec, so a size-(n+1) dataset extends the size-n dataset from one stream.
void sample(const DistributionSpec& spec, Stream& stream, std::span<double> out);
std::vector<double> sample(const DistributionSpec& spec, Stream& stream);

double density(const DistributionSpec& spec, std::span<const double> point);

/// Exact sup of the density; only defined for cube-supported specs.
double density_sup(const DistributionSpec& spec);

/// Integral of f_d^2; only defined for cube-supported specs.
double l2_density_norm_squared(const DistributionSpec& spec);

struct SquaredNormMoments {
    double mean;
    double variance;
};

/// Moments of sum_j W_j^2 with W_j ~ N(0, stddev_j^2).
SquaredNormMoments gaussian_squared_norm_moments(std::span<const double> stddev);

/// Sub-exponential witness beta(d) for the density supremum.
class DensityBoundRule {
public:
    enum class Family { constant, polynomial };

    static DensityBoundRule constant(double c);
    static DensityBoundRule polynomial(double c, double k);

    Family family() const noexcept { return family_; }
    double c() const noexcept { return c_; }
    double k() const noexcept { return k_; }

    double operator()(std::size_t d) const;
    double log_value(std::size_t d) const;

    bool operator==(const DensityBoundRule&) const = default;

private:
    DensityBoundRule(Family f, double c, double k) : family_(f), c_(c), k_(k) {}

    Family family_;
    double c_;
    double k_;
};

struct CenterQuery {
    bool operator==(const CenterQuery&) const = default;
};
struct CornerQuery {
    bool operator==(const CornerQuery&) const = default;
};
struct UniformRandomQueries {
    std::size_t count = 1;
    bool operator==(const UniformRandomQueries&) const = default;
};
struct ExplicitQueries {
    std::vector<std::vector<double>> points;
    bool operator==(const ExplicitQueries&) const = default;
};

using QuerySpec = std::variant<CenterQuery, CornerQuery, UniformRandomQueries, ExplicitQueries>;

/// Concrete query points. Center is (1/2,...) for cube specs and the mean for
/// Gaussians; Corner is the origin. Random queries are uniform on the cube
/// for cube specs and drawn from the law itself for Gaussians.
std::vector<std::vector<double>> realize_queries(const QuerySpec& query,
                                                 const DistributionSpec& spec, Stream& stream);

}  // namespace nnstab
