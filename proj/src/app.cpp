#include "nnstab/app.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

#include "nnstab/acceptance.hpp"
#include "nnstab/bounds.hpp"
#include "nnstab/random.hpp"

namespace nnstab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

/// Where a row sits on the sweep axis; a plain run reports d.
struct AxisPoint {
    std::string axis;
    double value;
};

AxisPoint axis_point(const RunConfig& base, const RunConfig& point) {
    if (!base.sweep) return {"d", static_cast<double>(point.d)};
    const double v = base.sweep->values.at(point.stream_id - base.stream_id);
    return {std::string(to_string(base.sweep->axis)), v};
}

std::vector<std::vector<double>> query_points(const RunConfig& c, const DistributionSpec& spec) {
    Stream s(c.seed, c.stream_id, 0, stream_group::queries);
    return realize_queries(c.query, spec, s);
}

/// Bound chain for one query, or empty when the law has no chain there
/// (a Gaussian off the centered p = 2 setting).
std::optional<BoundReport> try_bounds(const RunConfig& c, const DistributionSpec& spec,
                                      const DatasetSizeRule& rule, std::span<const double> q) {
    const std::optional<double> beta =
        spec.cube_supported() ? std::optional<double>(c.beta()) : std::nullopt;
    try {
        return make_bound_report({spec, rule, PNorm{c.p}, Epsilon{c.epsilon}, q, beta, c.zeta, c.omega});
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
}

BoundReport require_bounds(const RunConfig& c, const DistributionSpec& spec,
                           const DatasetSizeRule& rule, std::span<const double> q) {
    const std::optional<double> beta =
        spec.cube_supported() ? std::optional<double>(c.beta()) : std::nullopt;
    try {
        return make_bound_report({spec, rule, PNorm{c.p}, Epsilon{c.epsilon}, q, beta, c.zeta, c.omega});
    } catch (const std::domain_error& e) {
        throw ValidationError({std::string("bounds: ") + e.what()});
    }
}

PlotColumns result_plot() { return {"axis_value", "estimate", "ci_low", "ci_high", "bound"}; }

struct BoundCell {
    Cell value;
    std::string kind;
    Cell clamped;
};

void add_result_row(Table& t, const AxisPoint& ax, std::string_view quantity, std::uint64_t query_index,
                    const RunConfig& c, const ExperimentConfig& exp, const EstimateWithCI& e,
                    const BoundCell& b) {
    Cell n;
    try {
        n = exp.dataset_size();
    } catch (const std::exception&) {
    }
    t.add_row({ax.axis, ax.value, std::string(quantity), query_index, std::uint64_t{c.d}, n,
               exp.size_rule.log_n(c.d), c.p, c.epsilon, c.zeta, e.estimate, e.ci_low, e.ci_high,
               e.trials, e.excluded, e.method, b.value, b.kind, b.clamped, e.seed, e.stream_id});
}

void bound_rows(Table& t, const RunConfig& base, const RunConfig& c) {
    const auto spec = c.distribution.build(c.d);
    const auto rule = c.size_rule.build(Epsilon{c.epsilon});
    const auto ax = axis_point(base, c);
    const auto queries = query_points(c, spec);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto r = require_bounds(c, spec, rule, queries[i]);
        t.add_row({ax.axis, ax.value, r.method, std::uint64_t{i}, std::uint64_t{r.d}, r.log_n, r.p,
                   r.epsilon, r.beta, r.zeta, opt(r.omega), r.delta_value, r.gamma,
                   r.deviation_bound, r.instability_lower_bound, opt(r.ez_ratio_bound),
                   opt(r.stable_volume_bound), opt(r.log_largeness), r.deviation_clamped,
                   r.instability_clamped, r.volume_clamped});
    }
}

void estimate_rows(Table& t, RunOutput& out, const RunConfig& base, const RunConfig& c,
                   const Execution& exec) {
    const auto exp = c.experiment();
    const auto ax = axis_point(base, c);
    const auto queries = query_points(c, exp.spec);
    const std::string tag = ax.axis + "=" + format_double(ax.value);
    auto timed = [&](const std::string& label, auto&& fn) {
        Stopwatch sw;
        auto r = fn();
        out.timings.emplace_back(label + "[" + tag + "]", sw.seconds());
        return r;
    };
    const BoundCell none{Cell{}, "none", Cell{}};

    for (Estimator est : c.estimators) {
        switch (est) {
            case Estimator::instability:
                for (std::size_t i = 0; i < queries.size(); ++i) {
                    const auto e = timed("estimate_instability_probability", [&] {
                        return estimate_instability_probability(exp, queries[i], exec);
                    });
                    const auto r = try_bounds(c, exp.spec, exp.size_rule, queries[i]);
                    const BoundCell b = r ? BoundCell{r->instability_lower_bound, "lower",
                                                      r->instability_clamped}
                                          : none;
                    add_result_row(t, ax, "instability", i, c, exp, e, b);
                }
                break;
            case Estimator::deviation:
                for (std::size_t i = 0; i < queries.size(); ++i) {
                    const auto r = require_bounds(c, exp.spec, exp.size_rule, queries[i]);
                    DeviationTask task{exp.spec, queries[i], exp.p, r.gamma, r.delta_value,
                                       c.trials, c.seed, c.stream_id, c.confidence};
                    const auto e = timed("estimate_deviation_probability",
                                         [&] { return estimate_deviation_probability(task, exec); });
                    add_result_row(t, ax, "deviation", i, c, exp, e,
                                   {r.deviation_bound, "upper", r.deviation_clamped});
                }
                break;
            case Estimator::z_ratio: {
                const auto e = timed("estimate_expected_z_ratio",
                                     [&] { return estimate_expected_z_ratio(exp, exec); });
                BoundCell b = none;
                if (!queries.empty())
                    if (const auto r = try_bounds(c, exp.spec, exp.size_rule, queries[0]);
                        r && r->ez_ratio_bound)
                        b = {*r->ez_ratio_bound, "asymptotic-lower", Cell{}};
                add_result_row(t, ax, "z-ratio", 0, c, exp, e, b);
                break;
            }
            case Estimator::stable_fraction: {
                const auto s = timed("estimate_stable_fraction", [&] {
                    return estimate_stable_fraction(exp, c.n_queries, exec);
                });
                BoundCell b = none;
                if (!queries.empty())
                    if (const auto r = try_bounds(c, exp.spec, exp.size_rule, queries[0]);
                        r && r->stable_volume_bound)
                        b = {*r->stable_volume_bound, "lower", r->volume_clamped};
                add_result_row(t, ax, "stable-fraction", 0, c, exp, s.determinate_stable_fraction, b);
                break;
            }
            case Estimator::relative_variance:
                for (std::size_t i = 0; i < queries.size(); ++i) {
                    RelativeVarianceTask task{exp.spec, queries[i], exp.p, c.trials,
                                              c.seed, c.stream_id, c.confidence};
                    const auto e = timed("estimate_relative_variance",
                                         [&] { return estimate_relative_variance(task, exec); });
                    add_result_row(t, ax, "relative-variance", i, c, exp, e, none);
                }
                break;
            case Estimator::relative_contrast:
                for (std::size_t i = 0; i < queries.size(); ++i) {
                    const auto e = timed("estimate_relative_contrast", [&] {
                        return estimate_relative_contrast(exp, queries[i], exec);
                    });
                    add_result_row(t, ax, "relative-contrast", i, c, exp, e, none);
                }
                break;
        }
    }
}

void stable_region_rows(Table& t, RunOutput& out, const RunConfig& base, const RunConfig& c,
                        const Execution& exec) {
    const auto exp = c.experiment();
    if (!exp.spec.cube_supported())
        throw ValidationError({"distribution: stable-region draws queries on the unit cube and needs "
                               "a cube-supported law"});
    const auto ax = axis_point(base, c);
    Stopwatch sw;
    const auto s = estimate_stable_fraction(exp, c.n_queries, exec);
    out.timings.emplace_back("estimate_stable_fraction", sw.seconds());

    BoundCell b{Cell{}, "none", Cell{}};
    const std::vector<double> center(c.d, 0.5);
    if (const auto r = try_bounds(c, exp.spec, exp.size_rule, center); r && r->stable_volume_bound)
        b = {*r->stable_volume_bound, "lower", r->volume_clamped};
    add_result_row(t, ax, "stable-fraction", 0, c, exp, s.determinate_stable_fraction, b);
    add_result_row(t, ax, "stable-fraction-all", 0, c, exp, s.stable_fraction, b);

    EstimateWithCI ind = s.stable_fraction;
    ind.estimate = static_cast<double>(s.indeterminate) / static_cast<double>(c.n_queries);
    ind.ci_low = kNaN;
    ind.ci_high = kNaN;
    ind.excluded = 0;
    ind.method = "indeterminate-count";
    add_result_row(t, ax, "indeterminate-fraction", 0, c, exp, ind, {Cell{}, "none", Cell{}});
    for (std::size_t i = 0; i < s.queries.size(); ++i)
        add_result_row(t, ax, "query-stability", i, c, exp, s.queries[i].verdict.frequency,
                       {1.0 - c.zeta, "threshold", Cell{}});
}

void check_rows(Table& t, RunOutput& out, const RunConfig& base, const RunConfig& c,
                const Execution& exec) {
    const auto exp = c.experiment();
    const auto ax = axis_point(base, c);
    const auto queries = query_points(c, exp.spec);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto r = require_bounds(c, exp.spec, exp.size_rule, queries[i]);
        const double tail = std::min(1.0, r.deviation_bound * c.tail_scale);
        if (tail < 1.0) {
            DeviationTask task{exp.spec, queries[i], exp.p, r.gamma, r.delta_value,
                               c.trials, c.seed, c.stream_id, c.confidence};
            const auto e = estimate_deviation_probability(task, exec);
            const double limit = tail + 4.0 * e.standard_error();
            const bool ok = e.estimate <= limit;
            out.check_failed = out.check_failed || !ok;
            t.add_row({std::string("deviation <= bound + 4se"), ax.value, std::uint64_t{i},
                       std::uint64_t{c.d}, e.estimate, e.standard_error(), tail, limit, ok});
        }
        const double lower = instability_lower_bound_from_tail(tail, r.log_n);
        if (lower > 0.0) {
            const auto e = estimate_instability_probability(exp, queries[i], exec);
            const double limit = lower - 4.0 * e.standard_error();
            const bool ok = e.estimate >= limit;
            out.check_failed = out.check_failed || !ok;
            t.add_row({std::string("instability >= lower - 4se"), ax.value, std::uint64_t{i},
                       std::uint64_t{c.d}, e.estimate, e.standard_error(), lower, limit, ok});
        }
    }
}

RunOutput run_battery(const Execution& exec) {
    RunOutput out{Table(acceptance_columns(), {"criterion", "seconds", "", "", "time_limit"}), {}, false, {}};
    AcceptanceOptions opts;
    opts.exec = exec;
    for (const auto& r : run_acceptance(opts)) {
        out.table.add_row({std::uint64_t(r.id), r.title, r.passed, r.seconds,
                           r.time_limit > 0.0 ? Cell{r.time_limit} : Cell{}, r.detail});
        out.timings.emplace_back("criterion " + std::to_string(r.id), r.seconds);
        out.check_failed = out.check_failed || !r.passed;
    }
    return out;
}

}  // namespace

std::string_view to_string(Subcommand s) {
    switch (s) {
        case Subcommand::bounds: return "bounds";
        case Subcommand::estimate: return "estimate";
        case Subcommand::stable_region: return "stable-region";
        case Subcommand::sweep: return "sweep";
        case Subcommand::check: return "check";
    }
    return "?";
}

std::optional<Subcommand> subcommand_from_string(std::string_view s) {
    for (auto sub : {Subcommand::bounds, Subcommand::estimate, Subcommand::stable_region,
                     Subcommand::sweep, Subcommand::check})
        if (to_string(sub) == s) return sub;
    return std::nullopt;
}

std::vector<std::string> result_columns() {
    return {"axis",     "axis_value", "quantity", "query_index", "d",        "n",
            "log_n",    "p",          "epsilon",  "zeta",        "estimate", "ci_low",
            "ci_high",  "trials",     "excluded", "method",      "bound",    "bound_kind",
            "bound_clamped", "seed",  "stream_id"};
}

std::vector<std::string> bound_columns() {
    return {"axis",          "axis_value",          "method",
            "query_index",   "d",                   "log_n",
            "p",             "epsilon",             "beta",
            "zeta",          "omega",               "delta",
            "gamma",         "deviation_bound",     "instability_lower_bound",
            "ez_ratio_bound", "stable_volume_bound", "log_largeness",
            "deviation_clamped", "instability_clamped", "volume_clamped"};
}

std::vector<std::string> check_columns() {
    return {"check", "axis_value", "query_index", "d", "estimate", "standard_error", "bound", "limit",
            "passed"};
}

std::vector<std::string> acceptance_columns() {
    return {"criterion", "title", "passed", "seconds", "time_limit", "detail"};
}

RunOutput execute(Subcommand sub, const std::optional<RunConfig>& config, const Execution& exec) {
    if (!config) {
        if (sub != Subcommand::check) throw ValidationError({"config: required for " + std::string(to_string(sub))});
        return run_battery(exec);
    }
    const RunConfig& base = *config;
    if (sub == Subcommand::sweep && !base.sweep)
        throw ValidationError({"sweep: the sweep subcommand needs a sweep block"});

    const bool bound_only =
        sub == Subcommand::bounds || (sub == Subcommand::sweep && base.estimators.empty());
    RunOutput out{Table(result_columns(), result_plot()), {}, false, {}};
    if (bound_only)
        out.table = Table(bound_columns(),
                          {"axis_value", "instability_lower_bound", "", "", "deviation_bound"});
    else if (sub == Subcommand::check)
        out.table = Table(check_columns(), {"axis_value", "estimate", "", "", "bound"});
    if (sub == Subcommand::estimate && base.estimators.empty())
        throw ValidationError({"estimators: estimate needs at least one estimator"});

    // Points run in sweep order; a runtime failure keeps the finished rows and
    // marks the table as truncated.
    for (const auto& point : expand_sweep(base)) {
        try {
            Stopwatch sw;
            if (bound_only)
                bound_rows(out.table, base, point);
            else if (sub == Subcommand::check)
                check_rows(out.table, out, base, point, exec);
            else if (sub == Subcommand::stable_region)
                stable_region_rows(out.table, out, base, point, exec);
            else
                estimate_rows(out.table, out, base, point, exec);
            if (bound_only) out.timings.emplace_back("bounds[stream " + std::to_string(point.stream_id) + "]", sw.seconds());
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception& e) {
            if (!base.sweep) throw;
            const auto ax = axis_point(base, point);
            out.runtime_error = ax.axis + "=" + format_double(ax.value) + ": " + e.what();
            out.table.truncate(*out.runtime_error);
            break;
        }
    }
    return out;
}

std::string error_json(std::string_view kind, std::string_view message,
                       const std::vector<std::string>& violations) {
    nlohmann::json j = {{"error",
                         {{"kind", std::string(kind)},
                          {"message", std::string(message)},
                          {"violations", violations}}}};
    return j.dump();
}

int run(Subcommand sub, const std::optional<std::filesystem::path>& config_path,
        const RunOptions& options) {
    std::ostream& out = options.out ? *options.out : std::cout;
    std::ostream& err = options.err ? *options.err : std::cerr;
    const std::string started = utc_timestamp();
    Stopwatch wall;
    try {
        std::optional<RunConfig> config;
        if (config_path) {
            config = parse_config(*config_path);
            if (options.seed) {
                config->seed = *options.seed;
                validate(*config);
            }
        } else if (sub != Subcommand::check) {
            throw ValidationError({"--config: required for " + std::string(to_string(sub))});
        }

        RunOutput result = execute(sub, config, options.exec);

        RunManifest m;
        m.subcommand = std::string(to_string(sub));
        m.config_digest = config ? config_digest(*config) : "acceptance-battery";
        m.seed = config ? config->seed : 0;
        m.stream_algorithm = std::string(kStreamAlgorithm);
        m.artifact_version = NNSTAB_VERSION;
        m.started_at = started;
        m.timings = result.timings;
        m.wall_seconds = wall.seconds();

        const std::string body = render(result.table, options.format);
        if (options.out_dir) {
            std::filesystem::create_directories(*options.out_dir);
            const std::string stem = m.subcommand + "-" + m.config_digest;
            const std::string data_name = stem + "." + std::string(file_extension(options.format));
            m.outputs = {data_name};
            write_text_file(*options.out_dir / data_name, body);
            write_text_file(*options.out_dir / (stem + ".manifest.json"), m.to_json().dump(2) + "\n");
        } else {
            m.outputs = {"<stdout>"};
            out << body;
            out.flush();
            err << m.to_json().dump() << "\n";
        }

        if (result.runtime_error) {
            err << error_json("runtime", "sweep truncated at " + *result.runtime_error) << "\n";
            return exit_code::runtime;
        }
        if (result.check_failed) {
            err << error_json("check", "one or more bound-validity checks failed") << "\n";
            return exit_code::check_failed;
        }
        return exit_code::ok;
    } catch (const ParseError& e) {
        err << error_json("parse", e.what(),
                          {"line " + std::to_string(e.line()) + ", column " + std::to_string(e.column())})
            << "\n";
        return exit_code::validation;
    } catch (const ValidationError& e) {
        err << error_json("validation", e.what(), e.violations()) << "\n";
        return exit_code::validation;
    } catch (const std::exception& e) {
        err << error_json("runtime", e.what()) << "\n";
        return exit_code::runtime;
    }
}

}  // namespace nnstab
