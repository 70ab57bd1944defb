#include "nnstab/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nnstab {

using nlohmann::json;

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(message), line_(line), column_(column) {}

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "invalid config:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

namespace {

constexpr std::array<std::pair<Estimator, std::string_view>, 6> kEstimatorNames{{
    {Estimator::instability, "instability"},
    {Estimator::deviation, "deviation"},
    {Estimator::z_ratio, "z-ratio"},
    {Estimator::stable_fraction, "stable-fraction"},
    {Estimator::relative_variance, "relative-variance"},
    {Estimator::relative_contrast, "relative-contrast"},
}};

constexpr std::array<std::pair<SweepAxis, std::string_view>, 6> kAxisNames{{
    {SweepAxis::d, "d"},
    {SweepAxis::n, "n"},
    {SweepAxis::epsilon, "epsilon"},
    {SweepAxis::p, "p"},
    {SweepAxis::omega, "omega"},
    {SweepAxis::zeta, "zeta"},
}};

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

/// Reads typed fields out of a JSON object, collecting every problem with its
/// field path instead of stopping at the first.
class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& message) {
        errors.push_back(path + ": " + message);
    }

    bool object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "expected an object");
        return false;
    }

    void allow_keys(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& path) {
        for (const auto& [key, value] : j.items()) {
            (void)value;
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                fail(join(path, key), "unknown field");
        }
    }

    std::optional<double> number(const json& j, const char* key, const std::string& path) {
        if (!j.contains(key)) return std::nullopt;
        const auto& v = j.at(key);
        if (!v.is_number()) {
            fail(join(path, key), "expected a number");
            return std::nullopt;
        }
        return v.get<double>();
    }

    std::optional<std::uint64_t> count(const json& j, const char* key, const std::string& path) {
        if (!j.contains(key)) return std::nullopt;
        const auto& v = j.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_float() && is_integral(v.get<double>()) && v.get<double>() >= 0.0 &&
            v.get<double>() < 1.8e19)
            return static_cast<std::uint64_t>(v.get<double>());
        fail(join(path, key), "expected a non-negative integer");
        return std::nullopt;
    }

    std::optional<std::string> string(const json& j, const char* key, const std::string& path) {
        if (!j.contains(key)) return std::nullopt;
        const auto& v = j.at(key);
        if (!v.is_string()) {
            fail(join(path, key), "expected a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const json& v, const std::string& path) {
        if (!v.is_array()) {
            fail(path, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) {
                fail(path, "expected an array of numbers");
                return std::nullopt;
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    static std::string join(const std::string& path, std::string_view key) {
        return path.empty() ? std::string(key) : path + "." + std::string(key);
    }
};

DistributionTemplate read_distribution(Reader& r, const json& j) {
    const std::string path = "distribution";
    DistributionTemplate t;
    if (!r.object(j, path)) return t;
    const auto family = r.string(j, "family", path);
    if (!family) {
        r.fail(path + ".family", "required (uniform-cube, slab-mixture or gaussian)");
        return t;
    }
    if (*family == "uniform-cube") {
        t.family = DistributionTemplate::Family::uniform_cube;
        r.allow_keys(j, {"family"}, path);
    } else if (*family == "slab-mixture") {
        t.family = DistributionTemplate::Family::slab_mixture;
        r.allow_keys(j, {"family", "weight", "axis"}, path);
        if (auto w = r.number(j, "weight", path))
            t.weight = *w;
        else
            r.fail(path + ".weight", "required for slab-mixture");
        if (auto a = r.count(j, "axis", path)) t.axis = *a;
    } else if (*family == "gaussian") {
        t.family = DistributionTemplate::Family::gaussian;
        r.allow_keys(j, {"family", "stddev", "mean"}, path);
        if (!j.contains("stddev")) {
            r.fail(path + ".stddev", "required for gaussian");
        } else if (const auto& s = j.at("stddev"); s.is_array()) {
            t.spectrum = DistributionTemplate::Spectrum::explicit_values;
            if (auto v = r.numbers(s, path + ".stddev")) t.stddev = *v;
        } else if (r.object(s, path + ".stddev")) {
            const std::string sp = path + ".stddev";
            const auto kind = r.string(s, "kind", sp);
            if (kind == "constant") {
                t.spectrum = DistributionTemplate::Spectrum::constant;
                r.allow_keys(s, {"kind", "value"}, sp);
                t.scale = r.number(s, "value", sp).value_or(1.0);
            } else if (kind == "power") {
                t.spectrum = DistributionTemplate::Spectrum::power;
                r.allow_keys(s, {"kind", "scale", "exponent"}, sp);
                t.scale = r.number(s, "scale", sp).value_or(1.0);
                if (auto e = r.number(s, "exponent", sp))
                    t.exponent = *e;
                else
                    r.fail(sp + ".exponent", "required for a power spectrum");
            } else {
                r.fail(sp + ".kind", "expected constant or power");
            }
        }
        if (j.contains("mean")) {
            const auto& m = j.at("mean");
            if (m.is_number())
                t.mean_fill = m.get<double>();
            else if (auto v = r.numbers(m, path + ".mean"))
                t.mean = *v;
        }
    } else {
        r.fail(path + ".family", "unknown family '" + *family + "'");
    }
    return t;
}

SizeRuleTemplate read_size_rule(Reader& r, const json& j) {
    const std::string path = "size_rule";
    SizeRuleTemplate t;
    if (!r.object(j, path)) return t;
    const auto family = r.string(j, "family", path);
    if (family == "constant") {
        t.family = SizeRuleTemplate::Family::constant;
        r.allow_keys(j, {"family", "n"}, path);
        if (auto n = r.number(j, "n", path))
            t.a = *n;
        else
            r.fail(path + ".n", "required for a constant rule");
    } else if (family == "polynomial") {
        t.family = SizeRuleTemplate::Family::polynomial;
        r.allow_keys(j, {"family", "c", "k"}, path);
        t.a = r.number(j, "c", path).value_or(1.0);
        if (auto k = r.number(j, "k", path))
            t.k = *k;
        else
            r.fail(path + ".k", "required for a polynomial rule");
    } else if (family == "exponential") {
        t.family = SizeRuleTemplate::Family::exponential;
        r.allow_keys(j, {"family", "base"}, path);
        if (auto b = r.number(j, "base", path))
            t.a = *b;
        else
            r.fail(path + ".base", "required for an exponential rule");
    } else if (family == "stability-threshold") {
        t.family = SizeRuleTemplate::Family::stability_threshold;
        r.allow_keys(j, {"family"}, path);
    } else {
        r.fail(path + ".family",
               "expected constant, polynomial, exponential or stability-threshold");
    }
    return t;
}

QuerySpec read_query(Reader& r, const json& j) {
    const std::string path = "query";
    if (!r.object(j, path)) return CenterQuery{};
    const auto kind = r.string(j, "kind", path);
    if (kind == "center") {
        r.allow_keys(j, {"kind"}, path);
        return CenterQuery{};
    }
    if (kind == "corner") {
        r.allow_keys(j, {"kind"}, path);
        return CornerQuery{};
    }
    if (kind == "uniform-random") {
        r.allow_keys(j, {"kind", "count"}, path);
        return UniformRandomQueries{r.count(j, "count", path).value_or(1)};
    }
    if (kind == "explicit") {
        r.allow_keys(j, {"kind", "points"}, path);
        ExplicitQueries e;
        if (!j.contains("points") || !j.at("points").is_array()) {
            r.fail(path + ".points", "required array of points");
            return e;
        }
        for (const auto& pt : j.at("points"))
            if (auto v = r.numbers(pt, path + ".points")) e.points.push_back(*v);
        return e;
    }
    r.fail(path + ".kind", "expected center, corner, uniform-random or explicit");
    return CenterQuery{};
}

std::optional<DensityBoundRule> read_density_bound(Reader& r, const json& j) {
    const std::string path = "density_bound";
    if (!r.object(j, path)) return std::nullopt;
    const auto family = r.string(j, "family", path);
    const double c = r.number(j, "c", path).value_or(1.0);
    try {
        if (family == "constant") {
            r.allow_keys(j, {"family", "c"}, path);
            return DensityBoundRule::constant(c);
        }
        if (family == "polynomial") {
            r.allow_keys(j, {"family", "c", "k"}, path);
            return DensityBoundRule::polynomial(c, r.number(j, "k", path).value_or(0.0));
        }
    } catch (const std::invalid_argument& e) {
        r.fail(path, e.what());
        return std::nullopt;
    }
    if (family == "exponential")
        r.fail(path + ".family",
               "an exponential rule is not a sub-exponential density bound; use constant or "
               "polynomial");
    else
        r.fail(path + ".family", "expected constant or polynomial");
    return std::nullopt;
}

std::optional<SweepSpec> read_sweep(Reader& r, const json& j) {
    const std::string path = "sweep";
    if (!r.object(j, path)) return std::nullopt;
    r.allow_keys(j, {"axis", "values", "geometric"}, path);
    SweepSpec s;
    const auto axis = r.string(j, "axis", path);
    if (!axis || !sweep_axis_from_string(*axis)) {
        r.fail(path + ".axis", "expected one of d, n, epsilon, p, omega, zeta");
        return std::nullopt;
    }
    s.axis = *sweep_axis_from_string(*axis);
    const bool has_values = j.contains("values");
    const bool has_geometric = j.contains("geometric");
    if (has_values == has_geometric) {
        r.fail(path, "give exactly one of values or geometric");
        return std::nullopt;
    }
    if (has_values) {
        if (auto v = r.numbers(j.at("values"), path + ".values")) s.values = *v;
    } else {
        const auto& g = j.at("geometric");
        const std::string gp = path + ".geometric";
        if (!r.object(g, gp)) return std::nullopt;
        r.allow_keys(g, {"start", "ratio", "count"}, gp);
        const auto start = r.number(g, "start", gp);
        const auto ratio = r.number(g, "ratio", gp);
        const auto n = r.count(g, "count", gp);
        if (!start || !ratio || !n) {
            r.fail(gp, "start, ratio and count are required");
            return std::nullopt;
        }
        if (!(*ratio > 1.0)) r.fail(gp + ".ratio", "must be > 1");
        for (std::uint64_t k = 0; k < *n; ++k) {
            double v = *start * std::pow(*ratio, static_cast<double>(k));
            if (s.axis == SweepAxis::d || s.axis == SweepAxis::n) v = std::round(v);
            s.values.push_back(v);
        }
    }
    return s;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::size_t query_count(const QuerySpec& q) {
    if (const auto* r = std::get_if<UniformRandomQueries>(&q)) return r->count;
    if (const auto* e = std::get_if<ExplicitQueries>(&q)) return e->points.size();
    return 1;
}

void validate_point(const RunConfig& c, std::vector<std::string>& errors) {
    auto guard = [&](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            errors.push_back(std::string(field) + ": " + e.what());
        }
    };
    if (c.d == 0) {
        errors.push_back("d: must be >= 1");
        return;
    }
    guard("p", [&] { PNorm{c.p}; });
    guard("epsilon", [&] { Epsilon{c.epsilon}; });
    if (c.trials == 0) errors.push_back("trials: must be >= 1");
    if (!(c.confidence > 0.0 && c.confidence < 1.0))
        errors.push_back("confidence: must lie in (0, 1)");
    guard("zeta", [&] { require_zeta(c.zeta); });
    if (c.n_queries == 0) errors.push_back("n_queries: must be >= 1");
    if (c.memory_cap == 0) errors.push_back("memory_cap: must be >= 1");
    if (!(c.tail_scale > 0.0) || !std::isfinite(c.tail_scale))
        errors.push_back("fault_injection.tail_scale: must be finite and > 0");
    if (c.omega && !(*c.omega >= 0.0 && *c.omega < 1.0))
        errors.push_back("omega: must lie in [0, 1)");

    std::optional<DistributionSpec> spec;
    guard("distribution", [&] { spec = c.distribution.build(c.d); });
    if (c.epsilon > 0.0) guard("size_rule", [&] { (void)c.size_rule.build(Epsilon{c.epsilon}); });
    if (!spec) return;

    guard("query", [&] {
        Stream s(c.seed, c.stream_id, 0, stream_group::queries);
        (void)realize_queries(c.query, *spec, s);
    });
    if (c.density_bound) {
        if (!spec->cube_supported()) {
            errors.push_back("density_bound: only applies to cube-supported laws");
        } else if ((*c.density_bound)(c.d) < density_sup(*spec)) {
            errors.push_back("density_bound: rule value " + std::to_string((*c.density_bound)(c.d)) +
                             " at d=" + std::to_string(c.d) +
                             " is below the density supremum " +
                             std::to_string(density_sup(*spec)));
        }
    }
    for (Estimator e : c.estimators)
        if (e == Estimator::stable_fraction && !spec->cube_supported())
            errors.push_back("estimators: stable-fraction draws queries on the unit cube and "
                             "needs a cube-supported law");
}

}  // namespace

std::string_view to_string(Estimator e) {
    for (const auto& [k, v] : kEstimatorNames)
        if (k == e) return v;
    return "?";
}

std::optional<Estimator> estimator_from_string(std::string_view s) {
    for (const auto& [k, v] : kEstimatorNames)
        if (v == s) return k;
    return std::nullopt;
}

std::string_view to_string(SweepAxis a) {
    for (const auto& [k, v] : kAxisNames)
        if (k == a) return v;
    return "?";
}

std::optional<SweepAxis> sweep_axis_from_string(std::string_view s) {
    for (const auto& [k, v] : kAxisNames)
        if (v == s) return k;
    return std::nullopt;
}

DistributionSpec DistributionTemplate::build(std::size_t d) const {
    switch (family) {
        case Family::uniform_cube: return DistributionSpec::uniform_cube(d);
        case Family::slab_mixture: return DistributionSpec::slab_mixture(d, weight, axis);
        case Family::gaussian: break;
    }
    std::vector<double> sd;
    switch (spectrum) {
        case Spectrum::explicit_values: sd = stddev; break;
        case Spectrum::constant: sd.assign(d, scale); break;
        case Spectrum::power:
            sd.resize(d);
            for (std::size_t j = 0; j < d; ++j)
                sd[j] = scale * std::pow(static_cast<double>(j + 1), exponent);
            break;
    }
    if (sd.size() != d)
        throw std::invalid_argument("explicit stddev spectrum has " + std::to_string(sd.size()) +
                                    " entries, expected d = " + std::to_string(d));
    std::vector<double> mu = mean.empty() ? std::vector<double>(d, mean_fill) : mean;
    return DistributionSpec::gaussian(std::move(mu), std::move(sd));
}

DatasetSizeRule SizeRuleTemplate::build(Epsilon epsilon) const {
    switch (family) {
        case Family::constant: return DatasetSizeRule::constant(a);
        case Family::polynomial: return DatasetSizeRule::polynomial(a, k);
        case Family::exponential: return DatasetSizeRule::exponential(a);
        case Family::stability_threshold: return DatasetSizeRule::stability_threshold(epsilon);
    }
    throw std::logic_error("unreachable size rule family");
}

ExperimentConfig RunConfig::experiment() const {
    const Epsilon eps{epsilon};
    ExperimentConfig e{distribution.build(d), size_rule.build(eps), PNorm{p}, eps};
    e.query = query;
    e.trials = trials;
    e.zeta = zeta;
    e.seed = seed;
    e.stream_id = stream_id;
    e.confidence = confidence;
    e.memory_cap = memory_cap;
    return e;
}

double RunConfig::beta() const {
    const auto spec = distribution.build(d);
    return density_bound ? (*density_bound)(d) : density_sup(spec);
}

RunConfig parse_config_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("config parse error at line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + e.what(),
                         line, column);
    }

    Reader r;
    RunConfig c;
    if (!r.object(j, "config")) throw ValidationError(r.errors);
    r.allow_keys(j,
                 {"distribution", "d", "size_rule", "p", "epsilon", "query", "trials", "zeta", "seed",
                  "stream_id", "confidence", "memory_cap", "density_bound", "estimators",
                  "n_queries", "omega", "fault_injection", "sweep"},
                 "");

    if (j.contains("distribution"))
        c.distribution = read_distribution(r, j.at("distribution"));
    else
        r.fail("distribution", "required");
    if (auto d = r.count(j, "d", ""))
        c.d = *d;
    else if (!j.contains("d"))
        r.fail("d", "required");
    if (j.contains("size_rule"))
        c.size_rule = read_size_rule(r, j.at("size_rule"));
    else
        r.fail("size_rule", "required");
    if (auto p = r.number(j, "p", "")) c.p = *p;
    if (auto e = r.number(j, "epsilon", ""))
        c.epsilon = *e;
    else if (!j.contains("epsilon"))
        r.fail("epsilon", "required");
    if (j.contains("query")) c.query = read_query(r, j.at("query"));
    if (auto t = r.count(j, "trials", "")) c.trials = *t;
    if (auto z = r.number(j, "zeta", "")) c.zeta = *z;
    if (auto s = r.count(j, "seed", "")) c.seed = *s;
    if (auto s = r.count(j, "stream_id", "")) c.stream_id = *s;
    if (auto l = r.number(j, "confidence", "")) c.confidence = *l;
    if (auto m = r.count(j, "memory_cap", "")) c.memory_cap = *m;
    if (j.contains("density_bound")) c.density_bound = read_density_bound(r, j.at("density_bound"));
    if (j.contains("estimators")) {
        c.estimators.clear();
        const auto& es = j.at("estimators");
        if (!es.is_array()) {
            r.fail("estimators", "expected an array of estimator names");
        } else {
            for (const auto& e : es) {
                const auto name = e.is_string() ? e.get<std::string>() : std::string();
                if (auto v = estimator_from_string(name))
                    c.estimators.push_back(*v);
                else
                    r.fail("estimators", "unknown estimator '" + name + "'");
            }
        }
    }
    if (auto q = r.count(j, "n_queries", "")) c.n_queries = *q;
    if (auto o = r.number(j, "omega", "")) c.omega = *o;
    if (j.contains("fault_injection")) {
        const auto& f = j.at("fault_injection");
        if (r.object(f, "fault_injection")) {
            r.allow_keys(f, {"tail_scale"}, "fault_injection");
            c.tail_scale = r.number(f, "tail_scale", "fault_injection").value_or(1.0);
        }
    }
    if (j.contains("sweep")) c.sweep = read_sweep(r, j.at("sweep"));

    if (!r.errors.empty()) throw ValidationError(r.errors);
    validate(c);
    return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void validate(const RunConfig& config) {
    std::vector<std::string> errors;
    validate_point(config, errors);
    if (config.sweep) {
        const auto& s = *config.sweep;
        if (s.values.empty()) errors.push_back("sweep.values: must not be empty");
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (!std::isfinite(s.values[i])) errors.push_back("sweep.values: must be finite");
            if (i > 0 && !(s.values[i] > s.values[i - 1]))
                errors.push_back("sweep.values: must be strictly increasing");
        }
        if (s.axis == SweepAxis::d || s.axis == SweepAxis::n) {
            for (double v : s.values)
                if (!is_integral(v) || v < 1.0)
                    errors.push_back("sweep.values: axis " + std::string(to_string(s.axis)) +
                                     " needs integers >= 1");
        }
        if (s.axis == SweepAxis::d) {
            if (config.distribution.family == DistributionTemplate::Family::gaussian &&
                (config.distribution.spectrum == DistributionTemplate::Spectrum::explicit_values ||
                 !config.distribution.mean.empty()))
                errors.push_back("sweep.axis: a d sweep needs a generated gaussian spectrum and "
                                 "scalar mean, not explicit vectors");
            if (std::holds_alternative<ExplicitQueries>(config.query))
                errors.push_back("sweep.axis: a d sweep cannot use explicit query points");
        }
        if (config.estimators.size() > 1)
            errors.push_back("estimators: a sweep runs at most one estimator per point");
        if (query_count(config.query) != 1)
            errors.push_back("query: a sweep needs exactly one query point");
        if (errors.empty()) {
            for (const auto& point : expand_sweep(config)) {
                std::vector<std::string> sub;
                validate_point(point, sub);
                for (auto& e : sub)
                    errors.push_back("sweep point " + std::to_string(point.stream_id) + ": " + e);
            }
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
}

json to_json(const RunConfig& c) {
    json j;
    json dist;
    switch (c.distribution.family) {
        case DistributionTemplate::Family::uniform_cube: dist["family"] = "uniform-cube"; break;
        case DistributionTemplate::Family::slab_mixture:
            dist["family"] = "slab-mixture";
            dist["weight"] = c.distribution.weight;
            dist["axis"] = c.distribution.axis;
            break;
        case DistributionTemplate::Family::gaussian:
            dist["family"] = "gaussian";
            switch (c.distribution.spectrum) {
                case DistributionTemplate::Spectrum::explicit_values:
                    dist["stddev"] = c.distribution.stddev;
                    break;
                case DistributionTemplate::Spectrum::constant:
                    dist["stddev"] = {{"kind", "constant"}, {"value", c.distribution.scale}};
                    break;
                case DistributionTemplate::Spectrum::power:
                    dist["stddev"] = {{"kind", "power"},
                                      {"scale", c.distribution.scale},
                                      {"exponent", c.distribution.exponent}};
                    break;
            }
            if (c.distribution.mean.empty())
                dist["mean"] = c.distribution.mean_fill;
            else
                dist["mean"] = c.distribution.mean;
            break;
    }
    j["distribution"] = dist;
    j["d"] = c.d;

    json rule;
    switch (c.size_rule.family) {
        case SizeRuleTemplate::Family::constant:
            rule = {{"family", "constant"}, {"n", c.size_rule.a}};
            break;
        case SizeRuleTemplate::Family::polynomial:
            rule = {{"family", "polynomial"}, {"c", c.size_rule.a}, {"k", c.size_rule.k}};
            break;
        case SizeRuleTemplate::Family::exponential:
            rule = {{"family", "exponential"}, {"base", c.size_rule.a}};
            break;
        case SizeRuleTemplate::Family::stability_threshold:
            rule = {{"family", "stability-threshold"}};
            break;
    }
    j["size_rule"] = rule;
    j["p"] = c.p;
    j["epsilon"] = c.epsilon;

    std::visit(
        [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, CenterQuery>)
                j["query"] = {{"kind", "center"}};
            else if constexpr (std::is_same_v<T, CornerQuery>)
                j["query"] = {{"kind", "corner"}};
            else if constexpr (std::is_same_v<T, UniformRandomQueries>)
                j["query"] = {{"kind", "uniform-random"}, {"count", q.count}};
            else
                j["query"] = {{"kind", "explicit"}, {"points", q.points}};
        },
        c.query);

    j["trials"] = c.trials;
    j["zeta"] = c.zeta;
    j["seed"] = c.seed;
    j["stream_id"] = c.stream_id;
    j["confidence"] = c.confidence;
    j["memory_cap"] = c.memory_cap;
    if (c.density_bound) {
        if (c.density_bound->family() == DensityBoundRule::Family::constant)
            j["density_bound"] = {{"family", "constant"}, {"c", c.density_bound->c()}};
        else
            j["density_bound"] = {
                {"family", "polynomial"}, {"c", c.density_bound->c()}, {"k", c.density_bound->k()}};
    }
    json est = json::array();
    for (Estimator e : c.estimators) est.push_back(std::string(to_string(e)));
    j["estimators"] = est;
    j["n_queries"] = c.n_queries;
    if (c.omega) j["omega"] = *c.omega;
    j["fault_injection"] = {{"tail_scale", c.tail_scale}};
    if (c.sweep)
        j["sweep"] = {{"axis", std::string(to_string(c.sweep->axis))}, {"values", c.sweep->values}};
    return j;
}

std::string config_digest(const RunConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json(config).dump())));
    return buf;
}

std::vector<RunConfig> expand_sweep(const RunConfig& config) {
    if (!config.sweep) return {config};
    std::vector<RunConfig> out;
    out.reserve(config.sweep->values.size());
    for (std::size_t k = 0; k < config.sweep->values.size(); ++k) {
        RunConfig c = config;
        c.sweep.reset();
        c.stream_id = config.stream_id + k;
        const double v = config.sweep->values[k];
        switch (config.sweep->axis) {
            case SweepAxis::d: c.d = static_cast<std::size_t>(v); break;
            case SweepAxis::n:
                c.size_rule = {SizeRuleTemplate::Family::constant, v, 0.0};
                break;
            case SweepAxis::epsilon: c.epsilon = v; break;
            case SweepAxis::p: c.p = v; break;
            case SweepAxis::omega: c.omega = v; break;
            case SweepAxis::zeta: c.zeta = v; break;
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace nnstab
