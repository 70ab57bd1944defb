#pragma once

// JSON experiment configuration: parsing with full validation, canonical
// re-serialization, digests, and sweep expansion.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "nnstab/bounds.hpp"
#include "nnstab/distributions.hpp"
#include "nnstab/montecarlo.hpp"

namespace nnstab {

/// Malformed JSON; carries the 1-based line and column of the failure.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed JSON that violates one or more config invariants.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

enum class Estimator {
    instability,
    deviation,
    z_ratio,
    stable_fraction,
    relative_variance,
    relative_contrast,
};

std::string_view to_string(Estimator e);
std::optional<Estimator> estimator_from_string(std::string_view s);

enum class SweepAxis { d, n, epsilon, p, omega, zeta };

std::string_view to_string(SweepAxis a);
std::optional<SweepAxis> sweep_axis_from_string(std::string_view s);

struct SweepSpec {
    SweepAxis axis = SweepAxis::d;
    std::vector<double> values;  // strictly increasing

    bool operator==(const SweepSpec&) const = default;
};

/// Distribution family with dimension-free parameters, so a sweep over d can
/// rebuild the law at each point.
struct DistributionTemplate {
    enum class Family { uniform_cube, slab_mixture, gaussian };
    enum class Spectrum { explicit_values, constant, power };

    Family family = Family::uniform_cube;
    double weight = 0.0;     // slab
    std::size_t axis = 0;    // slab, 0-based
    Spectrum spectrum = Spectrum::constant;
    std::vector<double> stddev;  // explicit spectrum
    double scale = 1.0;          // constant value, or power-law scale
    double exponent = 0.0;       // lambda_j = scale * j^exponent, j = 1..d
    std::vector<double> mean;    // explicit mean; empty means mean_fill
    double mean_fill = 0.0;

    DistributionSpec build(std::size_t d) const;
    bool operator==(const DistributionTemplate&) const = default;
};

/// Size rule as written in the config; stability-threshold resolves to
/// b = 4(1 + eps) against the config's epsilon.
struct SizeRuleTemplate {
    enum class Family { constant, polynomial, exponential, stability_threshold };
    Family family = Family::constant;
    double a = 1.0;
    double k = 0.0;

    DatasetSizeRule build(Epsilon epsilon) const;
    bool operator==(const SizeRuleTemplate&) const = default;
};

struct RunConfig {
    DistributionTemplate distribution;
    std::size_t d = 1;
    SizeRuleTemplate size_rule;
    double p = 2.0;
    double epsilon = 0.1;
    QuerySpec query = CenterQuery{};
    std::uint64_t trials = kDefaultStabilityTrials;
    double zeta = kDefaultZeta;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    double confidence = 0.95;
    std::uint64_t memory_cap = kDefaultMemoryCap;
    std::optional<DensityBoundRule> density_bound;
    std::vector<Estimator> estimators{Estimator::instability};
    std::size_t n_queries = 50;
    std::optional<double> omega;
    double tail_scale = 1.0;  // negative-control knob for `check`; 1 = off
    std::optional<SweepSpec> sweep;

    ExperimentConfig experiment() const;
    /// beta(d): the configured density bound, else the exact supremum.
    double beta() const;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON with every default materialized.
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_digest(const RunConfig& config);

/// Sweep value k applied to the base config: stream_id becomes base + k and
/// the sweep block is removed. One entry per sweep value, in sweep order.
std::vector<RunConfig> expand_sweep(const RunConfig& config);

/// Re-runs every semantic check; throws ValidationError listing each failure.
void validate(const RunConfig& config);

}  // namespace nnstab
