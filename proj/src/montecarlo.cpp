#include "nnstab/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>

namespace nnstab {

namespace {

/// Runs fn(i) for i in [0, n). The serial backend is the reference loop; the
/// OpenMP backend distributes the same indices dynamically.
template <class Fn>
void for_each_index(std::uint64_t n, const Execution& exec, Fn&& fn) {
    if (exec.backend == Backend::serial) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = exec.resolved_workers();
    std::exception_ptr error;
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 8) num_threads(workers)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::uint64_t>(i));
        } catch (...) {
#pragma omp critical(nnstab_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

void require_trials(std::uint64_t trials) {
    if (trials == 0) throw std::invalid_argument("trials must be >= 1");
}

void require_level(double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence level must lie in (0, 1)");
}

void require_query(std::span<const double> query, std::size_t d) {
    if (query.size() != d)
        throw std::invalid_argument("query has dimension " + std::to_string(query.size()) +
                                    ", expected " + std::to_string(d));
    for (double v : query)
        if (!std::isfinite(v)) throw std::invalid_argument("query is not finite");
}

struct Extremes {
    double min_power;
    double max_power;
};

/// Draws n points from `stream` and tracks the extreme p-power distances.
Extremes scan_dataset(const DistributionSpec& spec, Stream& stream, std::uint64_t n,
                      std::span<const double> query, double p, std::vector<double>& point) {
    Extremes e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    const std::size_t d = spec.dimension();
    for (std::uint64_t i = 0; i < n; ++i) {
        sample(spec, stream, point);
        const double s = detail::power_sum_unchecked(point.data(), query.data(), d, p);
        e.min_power = std::min(e.min_power, s);
        e.max_power = std::max(e.max_power, s);
    }
    return e;
}

TrialOutcome outcome_from(const Extremes& e, double p, double epsilon) {
    const double d_min = root_of_power_sum(e.min_power, p);
    const double d_max = root_of_power_sum(e.max_power, p);
    return {d_min, d_max, z_value(d_min, d_max, epsilon), is_unstable(d_min, d_max, epsilon)};
}

TrialOutcome trial_kernel(const ExperimentConfig& config, std::uint64_t n,
                          std::span<const double> query, std::uint64_t trial, std::uint64_t group) {
    Stream stream = config.stream(trial, group);
    std::vector<double> point(config.dimension());
    const double p = config.p.value();
    return outcome_from(scan_dataset(config.spec, stream, n, query, p, point), p,
                        config.epsilon.value());
}

EstimateWithCI proportion(std::uint64_t successes, std::uint64_t trials, double level,
                          const ExperimentConfig& config, std::string method) {
    const auto [lo, hi] = wilson_interval(successes, trials, level);
    EstimateWithCI e;
    e.estimate = static_cast<double>(successes) / static_cast<double>(trials);
    e.ci_low = lo;
    e.ci_high = hi;
    e.trials = trials;
    e.seed = config.seed;
    e.stream_id = config.stream_id;
    e.method = std::move(method);
    return e;
}

struct MeanVariance {
    double mean;
    double variance;  // unbiased; 0 for a single value
};

MeanVariance mean_variance(std::span<const double> values) {
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    const double n = static_cast<double>(values.size());
    const double mean = sum.value() / n;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (values.size() < 2 || *lo == *hi) return {mean, 0.0};
    CompensatedSum sq;
    for (double v : values) sq.add((v - mean) * (v - mean));
    return {mean, sq.value() / (n - 1.0)};
}

}  // namespace

int Execution::resolved_workers() const {
    if (workers > 0) return workers;
    if (const char* env = std::getenv("NNSTAB_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return std::max(1, omp_get_max_threads());
}

std::uint64_t ExperimentConfig::dataset_size() const {
    const std::uint64_t n = size_rule.realize(dimension());
    const std::uint64_t d = dimension();
    if (n > memory_cap / d)
        throw MemoryCapExceeded("dataset of " + std::to_string(n) + " points in dimension " +
                                std::to_string(d) + " exceeds the memory cap of " +
                                std::to_string(memory_cap) + " values");
    return n;
}

double EstimateWithCI::standard_error() const {
    if (trials == 0) return 0.0;
    return std::sqrt(std::max(0.0, estimate * (1.0 - estimate)) / static_cast<double>(trials));
}

double normal_quantile_for_level(double level) {
    require_level(level);
    return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                          double level) {
    require_trials(trials);
    if (successes > trials) throw std::invalid_argument("successes exceed trials");
    const double z = normal_quantile_for_level(level);
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {std::min(lo, phat), std::max(hi, phat)};
}

TrialOutcome run_trial(const ExperimentConfig& config, std::span<const double> query,
                       std::uint64_t trial, std::uint64_t group) {
    require_query(query, config.dimension());
    return trial_kernel(config, config.dataset_size(), query, trial, group);
}

std::vector<TrialOutcome> run_trials(const ExperimentConfig& config, std::span<const double> query,
                                     const Execution& exec, std::uint64_t group) {
    require_trials(config.trials);
    require_query(query, config.dimension());
    const std::uint64_t n = config.dataset_size();
    std::vector<TrialOutcome> out(config.trials);
    for_each_index(config.trials, exec, [&](std::uint64_t i) {
        out[i] = trial_kernel(config, n, query, i, group);
    });
    return out;
}

EstimateWithCI estimate_instability_probability(const ExperimentConfig& config,
                                                std::span<const double> query,
                                                const Execution& exec, std::uint64_t group) {
    require_level(config.confidence);
    const auto outcomes = run_trials(config, query, exec, group);
    const auto unstable = static_cast<std::uint64_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [](const TrialOutcome& o) { return o.unstable; }));
    return proportion(unstable, config.trials, config.confidence, config, "fresh-dataset/wilson");
}

EstimateWithCI estimate_instability_reused_dataset(const ExperimentConfig& config,
                                                   std::span<const std::vector<double>> queries) {
    require_level(config.confidence);
    if (queries.empty()) throw std::invalid_argument("no queries");
    const std::size_t d = config.dimension();
    const std::uint64_t n = config.dataset_size();
    std::vector<double> data(n * d);
    Stream stream = config.stream(0, stream_group::reused_dataset);
    for (std::uint64_t i = 0; i < n; ++i)
        sample(config.spec, stream, std::span<double>(data).subspan(i * d, d));

    const double p = config.p.value();
    std::uint64_t unstable = 0;
    for (const auto& q : queries) {
        require_query(q, d);
        Extremes e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (std::uint64_t i = 0; i < n; ++i) {
            const double s = detail::power_sum_unchecked(data.data() + i * d, q.data(), d, p);
            e.min_power = std::min(e.min_power, s);
            e.max_power = std::max(e.max_power, s);
        }
        if (outcome_from(e, p, config.epsilon.value()).unstable) ++unstable;
    }
    return proportion(unstable, queries.size(), config.confidence, config,
                      "diagnostic:reused-dataset");
}

EstimateWithCI estimate_deviation_probability(const DeviationTask& task, const Execution& exec) {
    require_trials(task.trials);
    require_level(task.confidence);
    const std::size_t d = task.spec.dimension();
    require_query(task.query, d);
    if (!(task.gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
    const double lo = task.gamma * (1.0 - task.delta_value);
    const double hi = task.gamma * (1.0 + task.delta_value);
    const double p = task.p.value();

    std::vector<unsigned char> violated(task.trials);
    for_each_index(task.trials, exec, [&](std::uint64_t i) {
        Stream stream(task.seed, task.stream_id, i, stream_group::trials);
        std::vector<double> point(d);
        sample(task.spec, stream, point);
        const double s = detail::power_sum_unchecked(point.data(), task.query.data(), d, p);
        violated[i] = !(lo <= s && s <= hi);
    });
    const auto count = static_cast<std::uint64_t>(std::count(violated.begin(), violated.end(), 1));
    const auto [ci_lo, ci_hi] = wilson_interval(count, task.trials, task.confidence);
    EstimateWithCI e;
    e.estimate = static_cast<double>(count) / static_cast<double>(task.trials);
    e.ci_low = ci_lo;
    e.ci_high = ci_hi;
    e.trials = task.trials;
    e.seed = task.seed;
    e.stream_id = task.stream_id;
    e.method = "band-violation/wilson";
    return e;
}

EstimateWithCI estimate_expected_z_ratio(const ExperimentConfig& config, const Execution& exec) {
    require_trials(config.trials);
    require_level(config.confidence);
    const std::size_t d = config.dimension();
    const std::uint64_t n = config.dataset_size();
    const double p = config.p.value();
    const double scale = std::pow(static_cast<double>(d), 1.0 / p);

    std::vector<double> ratios(config.trials);
    for_each_index(config.trials, exec, [&](std::uint64_t i) {
        Stream stream = config.stream(i, stream_group::trials);
        std::vector<double> query(d);
        std::vector<double> point(d);
        sample(config.spec, stream, query);
        const auto o = outcome_from(scan_dataset(config.spec, stream, n, query, p, point), p,
                                    config.epsilon.value());
        ratios[i] = o.z / scale;
    });

    const auto mv = mean_variance(ratios);
    const double half = normal_quantile_for_level(config.confidence) *
                        std::sqrt(mv.variance / static_cast<double>(config.trials));
    EstimateWithCI e;
    e.estimate = mv.mean;
    e.ci_low = mv.mean - half;
    e.ci_high = mv.mean + half;
    e.trials = config.trials;
    e.seed = config.seed;
    e.stream_id = config.stream_id;
    e.method = "independent-query/normal";
    return e;
}

StabilityVerdict classify_query_stability(const ExperimentConfig& config,
                                          std::span<const double> query, const Execution& exec,
                                          std::uint64_t group) {
    require_zeta(config.zeta);
    require_level(config.confidence);
    const auto outcomes = run_trials(config, query, exec, group);
    const auto nonneg = static_cast<std::uint64_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [](const TrialOutcome& o) { return o.z >= 0.0; }));

    StabilityVerdict v;
    v.frequency = proportion(nonneg, config.trials, config.confidence, config, "z-nonnegative/wilson");
    const double threshold = 1.0 - config.zeta;
    v.stable = v.frequency.estimate >= threshold;
    v.indeterminate = v.frequency.ci_low < threshold && threshold < v.frequency.ci_high;
    return v;
}

StableRegionEstimate estimate_stable_fraction(const ExperimentConfig& config,
                                              std::size_t n_queries, const Execution& exec) {
    if (n_queries == 0) throw std::invalid_argument("n_queries must be >= 1");
    require_zeta(config.zeta);
    const auto cube = DistributionSpec::uniform_cube(config.dimension());

    StableRegionEstimate r;
    r.zeta = config.zeta;
    r.queries.reserve(n_queries);
    std::uint64_t stable = 0;
    for (std::size_t i = 0; i < n_queries; ++i) {
        Stream qs = config.stream(i, stream_group::queries);
        QueryClassification c;
        c.point = sample(cube, qs);
        c.verdict = classify_query_stability(config, c.point, exec, stream_group::per_query_base + i);
        if (c.verdict.indeterminate)
            ++r.indeterminate;
        else if (c.verdict.stable)
            ++stable;
        r.queries.push_back(std::move(c));
    }
    r.stable_fraction =
        proportion(stable, n_queries, config.confidence, config, "stable-queries/wilson");
    r.stable_fraction.excluded = r.indeterminate;
    const std::uint64_t determinate = n_queries - r.indeterminate;
    if (determinate > 0) {
        r.determinate_stable_fraction = proportion(stable, determinate, config.confidence, config,
                                                   "stable-determinate-queries/wilson");
    } else {
        r.determinate_stable_fraction.estimate = std::numeric_limits<double>::quiet_NaN();
        r.determinate_stable_fraction.ci_low = 0.0;
        r.determinate_stable_fraction.ci_high = 1.0;
        r.determinate_stable_fraction.seed = config.seed;
        r.determinate_stable_fraction.stream_id = config.stream_id;
        r.determinate_stable_fraction.method = "stable-determinate-queries/wilson";
    }
    r.determinate_stable_fraction.excluded = r.indeterminate;
    return r;
}

EstimateWithCI estimate_relative_variance(const RelativeVarianceTask& task, const Execution& exec) {
    if (task.trials < 2) throw std::invalid_argument("relative variance needs trials >= 2");
    require_level(task.confidence);
    const std::size_t d = task.spec.dimension();
    require_query(task.query, d);
    const double p = task.p.value();

    std::vector<double> dist(task.trials);
    for_each_index(task.trials, exec, [&](std::uint64_t i) {
        Stream stream(task.seed, task.stream_id, i, stream_group::trials);
        std::vector<double> point(d);
        sample(task.spec, stream, point);
        dist[i] = root_of_power_sum(
            detail::power_sum_unchecked(point.data(), task.query.data(), d, p), p);
    });

    const auto mv = mean_variance(dist);
    if (!(mv.mean > 0.0))
        throw std::domain_error("relative variance undefined: mean distance is zero");
    const double estimate = mv.variance / (mv.mean * mv.mean);

    std::vector<double> boot(kBootstrapResamples);
    const std::uint64_t m = task.trials;
    for_each_index(kBootstrapResamples, exec, [&](std::uint64_t b) {
        Stream stream(task.seed, task.stream_id, b, stream_group::bootstrap);
        std::vector<double> resample(m);
        for (auto& v : resample) {
            const auto idx = static_cast<std::uint64_t>(stream.uniform() * static_cast<double>(m));
            v = dist[std::min(idx, m - 1)];
        }
        const auto r = mean_variance(resample);
        boot[b] = r.mean > 0.0 ? r.variance / (r.mean * r.mean) : 0.0;
    });
    std::sort(boot.begin(), boot.end());
    const double tail = 0.5 * (1.0 - task.confidence);
    auto pick = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(boot.size() - 1)));
        return boot[std::min(idx, boot.size() - 1)];
    };

    EstimateWithCI e;
    e.estimate = estimate;
    e.ci_low = std::min(pick(tail), estimate);
    e.ci_high = std::max(pick(1.0 - tail), estimate);
    e.trials = task.trials;
    e.seed = task.seed;
    e.stream_id = task.stream_id;
    e.method = "plug-in/bootstrap-percentile-" + std::to_string(kBootstrapResamples);
    return e;
}

EstimateWithCI estimate_relative_contrast(const ExperimentConfig& config,
                                          std::span<const double> query, const Execution& exec) {
    require_level(config.confidence);
    if (config.dataset_size() < 2) throw std::invalid_argument("relative contrast needs n >= 2");
    const auto outcomes = run_trials(config, query, exec);

    std::vector<double> contrast;
    contrast.reserve(outcomes.size());
    std::uint64_t excluded = 0;
    for (const auto& o : outcomes) {
        if (o.d_min > 0.0)
            contrast.push_back((o.d_max - o.d_min) / o.d_min);
        else
            ++excluded;
    }
    if (contrast.empty()) throw std::domain_error("every trial had a zero nearest distance");
    std::sort(contrast.begin(), contrast.end());

    const std::size_t m = contrast.size();
    const double median = m % 2 == 1 ? contrast[m / 2] : 0.5 * (contrast[m / 2 - 1] + contrast[m / 2]);
    // Ranks of the binomial(m, 1/2) order-statistic interval, normal approximation.
    const double z = normal_quantile_for_level(config.confidence);
    const double half_width = 0.5 * z * std::sqrt(static_cast<double>(m));
    const double mid = 0.5 * static_cast<double>(m);
    const auto lo_rank = static_cast<std::size_t>(std::max(1.0, std::floor(mid - half_width)));
    const auto hi_rank = static_cast<std::size_t>(
        std::min(static_cast<double>(m), std::ceil(mid + half_width + 1.0)));

    EstimateWithCI e;
    e.estimate = median;
    e.ci_low = std::min(contrast[lo_rank - 1], median);
    e.ci_high = std::max(contrast[hi_rank - 1], median);
    e.trials = config.trials;
    e.seed = config.seed;
    e.stream_id = config.stream_id;
    e.method = "median/order-statistic";
    e.excluded = excluded;
    return e;
}

}  // namespace nnstab
