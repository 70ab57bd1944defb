#pragma once

// Reproducible Monte Carlo estimators for the instability probability, the
// band-violation tail, E[Z]/d^(1/p), query stability and the concentration
// diagnostics.
//
// Trials are independent work units. Trial i draws only from the stream at
// lane i of its group, per-trial results land in slot i, and aggregation
// walks the slots in index order. The OpenMP backend therefore reproduces
// the serial reference bit for bit at any worker count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nnstab/bounds.hpp"
#include "nnstab/distributions.hpp"
#include "nnstab/metric.hpp"
#include "nnstab/random.hpp"

namespace nnstab {

enum class Backend { serial, openmp };

struct Execution {
    Backend backend = Backend::openmp;
    int workers = 0;  // 0: NNSTAB_WORKERS, else the OpenMP default

    static Execution serial() { return {Backend::serial, 1}; }
    static Execution parallel(int workers) { return {Backend::openmp, workers}; }
    int resolved_workers() const;
};

/// Stream groups; lanes inside a group are trial (or query) indices.
namespace stream_group {
inline constexpr std::uint64_t trials = 0;
inline constexpr std::uint64_t queries = 1;
inline constexpr std::uint64_t bootstrap = 2;
inline constexpr std::uint64_t reused_dataset = 3;
/// Trials of the i-th stability query use group per_query_base + i.
inline constexpr std::uint64_t per_query_base = 16;
}  // namespace stream_group

inline constexpr std::uint64_t kDefaultMemoryCap = std::uint64_t{1} << 31;
inline constexpr std::uint64_t kDefaultStabilityTrials = 2000;
inline constexpr std::size_t kBootstrapResamples = 200;

class MemoryCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    DistributionSpec spec;
    DatasetSizeRule size_rule;
    PNorm p;
    Epsilon epsilon;
    QuerySpec query = CenterQuery{};
    std::uint64_t trials = kDefaultStabilityTrials;
    double zeta = kDefaultZeta;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    double confidence = 0.95;
    std::uint64_t memory_cap = kDefaultMemoryCap;

    std::size_t dimension() const noexcept { return spec.dimension(); }
    /// n(d) after the memory-cap check (n * d values per trial).
    std::uint64_t dataset_size() const;
    Stream stream(std::uint64_t lane, std::uint64_t group) const {
        return Stream(seed, stream_id, lane, group);
    }
};

struct TrialOutcome {
    double d_min;
    double d_max;
    double z;
    bool unstable;

    bool operator==(const TrialOutcome&) const = default;
};

struct EstimateWithCI {
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::string method;
    std::uint64_t excluded = 0;  // trials dropped by the estimator

    bool operator==(const EstimateWithCI&) const = default;
    double standard_error() const;  // binomial SE for probability estimates
};

struct StabilityVerdict {
    bool stable = false;
    bool indeterminate = false;
    EstimateWithCI frequency;  // empirical Pr[z >= 0]

    bool operator==(const StabilityVerdict&) const = default;
};

struct QueryClassification {
    std::vector<double> point;
    StabilityVerdict verdict;

    bool operator==(const QueryClassification&) const = default;
};

struct StableRegionEstimate {
    EstimateWithCI stable_fraction;  // stable / all queries
    EstimateWithCI determinate_stable_fraction;  // stable / determinate queries
    std::uint64_t indeterminate = 0;
    double zeta = kDefaultZeta;
    std::vector<QueryClassification> queries;

    bool operator==(const StableRegionEstimate&) const = default;
};

/// Wilson score interval; always contains successes / trials.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                          double level);

/// Two-sided standard normal quantile for a central `level` interval.
double normal_quantile_for_level(double level);

/// Samples n(d) fresh points from the trial's stream and reduces their
/// distances to `query`.
TrialOutcome run_trial(const ExperimentConfig& config, std::span<const double> query,
                       std::uint64_t trial, std::uint64_t group = stream_group::trials);

std::vector<TrialOutcome> run_trials(const ExperimentConfig& config, std::span<const double> query,
                                     const Execution& exec = {},
                                     std::uint64_t group = stream_group::trials);

/// Fraction of fresh datasets with max <= (1 + eps) min; Wilson interval.
EstimateWithCI estimate_instability_probability(const ExperimentConfig& config,
                                                std::span<const double> query,
                                                const Execution& exec = {},
                                                std::uint64_t group = stream_group::trials);

/// Diagnostic only: one dataset shared by every query; the fraction of
/// queries whose nearest-neighbor result is unstable.
EstimateWithCI estimate_instability_reused_dataset(const ExperimentConfig& config,
                                                   std::span<const std::vector<double>> queries);

struct DeviationTask {
    const DistributionSpec& spec;
    std::span<const double> query;
    PNorm p;
    double gamma;
    double delta_value;
    std::uint64_t trials;
    std::uint64_t seed;
    std::uint64_t stream_id = 0;
    double confidence = 0.95;
};

/// Frequency of |‖Y - q‖_p^p - gamma| > gamma * delta over single draws.
EstimateWithCI estimate_deviation_probability(const DeviationTask& task, const Execution& exec = {});

/// Mean of z / d^(1/p) with the query redrawn from the law on every trial.
EstimateWithCI estimate_expected_z_ratio(const ExperimentConfig& config, const Execution& exec = {});

/// Pr[z >= 0] >= 1 - zeta, with the verdict flagged indeterminate when the
/// Wilson interval straddles 1 - zeta.
StabilityVerdict classify_query_stability(const ExperimentConfig& config,
                                          std::span<const double> query, const Execution& exec = {},
                                          std::uint64_t group = stream_group::trials);

/// Queries drawn uniformly on the cube; each classified with its own trials.
StableRegionEstimate estimate_stable_fraction(const ExperimentConfig& config,
                                              std::size_t n_queries, const Execution& exec = {});

struct RelativeVarianceTask {
    const DistributionSpec& spec;
    std::span<const double> query;
    PNorm p;
    std::uint64_t trials;
    std::uint64_t seed;
    std::uint64_t stream_id = 0;
    double confidence = 0.95;
};

/// Var[D] / E[D]^2 for D = ‖Y - q‖_p; percentile bootstrap interval.
EstimateWithCI estimate_relative_variance(const RelativeVarianceTask& task,
                                          const Execution& exec = {});

/// Median of (d_max - d_min) / d_min with a distribution-free interval.
EstimateWithCI estimate_relative_contrast(const ExperimentConfig& config,
                                          std::span<const double> query, const Execution& exec = {});

}  // namespace nnstab
