#include "nnstab/acceptance.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include "nnstab/bounds.hpp"
#include "nnstab/distributions.hpp"
#include "nnstab/metric.hpp"

namespace nnstab {

namespace {

constexpr std::uint64_t kSeed = 0x5eed'2024'0001ULL;

class Fingerprint {
public:
    void add(double v) {
        char buf[20];
        std::snprintf(buf, sizeof buf, "%016llx;", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(v)));
        text_ += buf;
    }
    void add(std::uint64_t v) { text_ += std::to_string(v) + ";"; }
    void add(const EstimateWithCI& e) {
        add(e.estimate);
        add(e.ci_low);
        add(e.ci_high);
        add(e.trials);
        add(e.excluded);
    }
    std::string str() const { return text_; }

private:
    std::string text_;
};

std::string fmt(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

struct Outcome {
    bool passed = true;
    std::ostringstream detail;
    Fingerprint fp;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail << "FAILED " << what << "; ";
        }
    }
};

// Criterion 1: d = 1, q = 0, p = 1, n = 2 has Pr[unstable] = eps / (1 + eps).
void closed_form_oracle(Outcome& out, const Execution& exec) {
    const std::array<double, 2> eps_values{0.1, 1.0};
    const std::vector<double> q{0.0};
    for (std::size_t k = 0; k < eps_values.size(); ++k) {
        const double eps = eps_values[k];
        ExperimentConfig cfg{DistributionSpec::uniform_cube(1), DatasetSizeRule::constant(2), PNorm{1.0},
                             Epsilon{eps}};
        cfg.trials = 100000;
        cfg.seed = kSeed;
        cfg.stream_id = 100 + k;
        const auto e = estimate_instability_probability(cfg, q, exec);
        const double truth = eps / (1.0 + eps);
        out.fp.add(e);
        out.detail << "eps=" << eps << " est=" << fmt(e.estimate) << " truth=" << fmt(truth) << "; ";
        out.require(std::abs(e.estimate - truth) <= 0.01, "|est - truth| <= 0.01 at eps=" + fmt(eps));
    }
}

// Criterion 2: deviation frequency below the Hoeffding bound and instability
// frequency above its lower bound, each with 4 standard errors of slack.
void hoeffding_validity(Outcome& out, const Execution& exec) {
    struct Point {
        double p;
        double eps;
        std::size_t d;
    };
    const std::vector<Point> grid{{1, 1, 100}, {1, 1, 200}, {1, 1, 400},
                                  {2, 1, 100}, {2, 1, 200}, {2, 1, 400}};
    const auto size_rule = DatasetSizeRule::constant(10);
    std::uint64_t stream = 200;
    std::size_t deviation_checks = 0;
    std::size_t instability_checks = 0;
    for (const auto& g : grid) {
        const auto spec = DistributionSpec::uniform_cube(g.d);
        for (const QuerySpec& qs : {QuerySpec{CenterQuery{}}, QuerySpec{CornerQuery{}}}) {
            Stream unused(kSeed, 0, 0, stream_group::queries);
            const auto q = realize_queries(qs, spec, unused).front();
            const auto report =
                make_bound_report({spec, size_rule, PNorm{g.p}, Epsilon{g.eps}, q, 1.0, kDefaultZeta, std::nullopt});
            const std::string where = "p=" + fmt(g.p) + " d=" + std::to_string(g.d) +
                                      (std::holds_alternative<CenterQuery>(qs) ? " center" : " corner");
            if (report.deviation_bound < 1.0) {
                DeviationTask task{spec, q, PNorm{g.p}, report.gamma, report.delta_value, 100000,
                                   kSeed, stream++};
                const auto e = estimate_deviation_probability(task, exec);
                out.fp.add(e);
                ++deviation_checks;
                const double limit = report.deviation_bound + 4.0 * e.standard_error();
                out.require(e.estimate <= limit, "deviation " + where + " est=" + fmt(e.estimate) +
                                                     " > " + fmt(limit));
            }
            if (report.instability_lower_bound > 0.0) {
                ExperimentConfig cfg{spec, size_rule, PNorm{g.p}, Epsilon{g.eps}};
                cfg.trials = 20000;
                cfg.seed = kSeed;
                cfg.stream_id = stream++;
                const auto e = estimate_instability_probability(cfg, q, exec);
                out.fp.add(e);
                ++instability_checks;
                const double limit = report.instability_lower_bound - 4.0 * e.standard_error();
                out.require(e.estimate >= limit, "instability " + where + " est=" + fmt(e.estimate) +
                                                     " < " + fmt(limit));
            }
        }
    }
    const double d200 = hoeffding_deviation_bound(200, PNorm{1.0}, Epsilon{1.0}, 1.0);
    out.require(rel_err(d200, 2.0 * std::exp(-200.0 / 72.0)) < 1e-12, "bound(d=200) = 2e^(-200/72)");
    out.detail << deviation_checks << " deviation and " << instability_checks
               << " instability comparisons; bound(d=200)=" << fmt(d200) << "; ";
}

// Criterion 3: instability grows with d for n(d) = d.
void instability_trend(Outcome& out, const Execution& exec) {
    const std::array<std::size_t, 4> dims{2, 16, 128, 1024};
    std::vector<EstimateWithCI> est;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const auto spec = DistributionSpec::uniform_cube(dims[k]);
        ExperimentConfig cfg{spec, DatasetSizeRule::polynomial(1.0, 1.0), PNorm{2.0}, Epsilon{0.2}};
        cfg.trials = 2000;
        cfg.seed = kSeed;
        cfg.stream_id = 300 + k;
        Stream unused(kSeed, 0, 0, stream_group::queries);
        const auto q = realize_queries(CenterQuery{}, spec, unused).front();
        est.push_back(estimate_instability_probability(cfg, q, exec));
        out.fp.add(est.back());
        out.detail << "d=" << dims[k] << ":" << fmt(est.back().estimate, 4) << " ";
    }
    for (std::size_t k = 1; k < est.size(); ++k) {
        const double slack = 2.0 * std::hypot(est[k].standard_error(), est[k - 1].standard_error());
        out.require(est[k].estimate >= est[k - 1].estimate - slack,
                    "non-decreasing between d=" + std::to_string(dims[k - 1]) + " and d=" +
                        std::to_string(dims[k]));
    }
    out.require(est.back().estimate >= 0.9, "estimate at d=1024 >= 0.9");
    out.detail << "; ";
}

// Criterion 4: n = ceil(4.4^6) points in d = 6 leave almost every query stable.
void exponential_stability(Outcome& out, const Execution& exec) {
    ExperimentConfig cfg{DistributionSpec::uniform_cube(6), DatasetSizeRule::exponential(4.4),
                         PNorm{2.0}, Epsilon{0.1}};
    cfg.trials = 2000;
    cfg.zeta = 0.995;
    cfg.seed = kSeed;
    cfg.stream_id = 400;
    const auto r = estimate_stable_fraction(cfg, 50, exec);
    out.fp.add(r.stable_fraction);
    out.fp.add(r.determinate_stable_fraction);
    for (const auto& q : r.queries) out.fp.add(q.verdict.frequency);
    const double indeterminate = static_cast<double>(r.indeterminate) / 50.0;
    out.detail << "n=" << cfg.dataset_size() << " stable(determinate)="
               << fmt(r.determinate_stable_fraction.estimate, 4)
               << " indeterminate=" << r.indeterminate << "/50; ";
    out.require(r.determinate_stable_fraction.estimate >= 0.98, "stable fraction >= 0.98");
    out.require(indeterminate <= 0.10, "indeterminate <= 10%");
}

// Criterion 5: the E[Z]/d^(1/p) lower bound stays above 1/100 at b = 4(1+eps).
void ez_floor(Outcome& out, const Execution&) {
    const double eps = 0.1;
    for (std::size_t d : {500, 1000, 2000}) {
        for (double p : {1.0, 2.0}) {
            const double log_n = static_cast<double>(d) * std::log(4.0 * (1.0 + eps));
            const double v = ez_ratio_lower_bound(d, PNorm{p}, Epsilon{eps}, log_n, 1.0);
            out.fp.add(v);
            out.detail << "d=" << d << ",p=" << p << ":" << fmt(v, 5) << " ";
            out.require(v >= 0.01, "ez bound >= 1/100 at d=" + std::to_string(d) + " p=" + fmt(p));
        }
    }
    out.detail << "; ";
}

// Criterion 6: unit-ball volumes against closed forms and the d^(1/p) V^(1/d) limit.
void ball_machinery(Outcome& out, const Execution&) {
    double worst = 0.0;
    for (std::size_t d = 1; d <= 50; ++d) {
        const double dd = static_cast<double>(d);
        const double closed = (dd / 2.0) * std::log(std::numbers::pi) - std::lgamma(1.0 + dd / 2.0);
        worst = std::max(worst, rel_err(std::exp(log_unit_ball_volume(d, PNorm{2.0})), std::exp(closed)));
    }
    for (std::size_t d = 1; d <= 20; ++d) {
        double closed = 1.0;
        for (std::size_t k = 1; k <= d; ++k) closed *= 2.0 / static_cast<double>(k);
        worst = std::max(worst, rel_err(std::exp(log_unit_ball_volume(d, PNorm{1.0})), closed));
    }
    out.require(worst <= 1e-10, "closed-form volumes to 1e-10 relative");
    out.detail << "max rel err " << fmt(worst, 3) << "; ";
    for (double p : {1.0, 2.0, 3.0}) {
        const auto c = ball_volume_limit_check(10000, PNorm{p});
        out.fp.add(c.value);
        out.detail << "p=" << p << ": " << fmt(c.value, 5) << " <= " << fmt(c.limit, 5) << "; ";
        out.require(c.value <= c.limit, "limit check at p=" + fmt(p));
    }
}

// Criterion 7: Chebyshev bound for Gaussians and the moments of ||Y||^2.
void gaussian_validity(Outcome& out, const Execution& exec) {
    const std::size_t d = 1000;
    const std::vector<double> identity(d, 1.0);
    const double bound = chebyshev_gaussian_deviation_bound(identity, Epsilon{0.5});
    out.fp.add(bound);
    // 2 d / (delta^2 d^2) with delta = 5/13.
    const double exact = 2.0 * 169.0 / (25.0 * static_cast<double>(d));
    out.require(rel_err(bound, exact) < 1e-12, "bound equals 338 / 25000");
    out.require(std::abs(bound - 0.013522) < 5e-6, "bound within 5e-6 of 0.013522");
    out.detail << "bound=" << fmt(bound, 8) << "; ";

    const auto spec = DistributionSpec::gaussian(std::vector<double>(d, 0.0), identity);
    const std::vector<double> origin(d, 0.0);
    const auto m = gaussian_squared_norm_moments(identity);
    DeviationTask task{spec, origin, PNorm{2.0}, m.mean, delta(Epsilon{0.5}, PNorm{2.0}), 100000, kSeed, 700};
    const auto e = estimate_deviation_probability(task, exec);
    out.fp.add(e);
    out.detail << "deviation est=" << fmt(e.estimate) << "; ";
    out.require(e.estimate <= bound + 4.0 * e.standard_error(), "deviation <= bound + 4 SE");

    std::vector<std::vector<double>> spectra;
    spectra.push_back(std::vector<double>(200, 1.0));
    std::vector<double> decaying(200);
    for (std::size_t j = 0; j < decaying.size(); ++j) decaying[j] = 1.0 / std::sqrt(double(j + 1));
    spectra.push_back(decaying);
    std::vector<double> two_level(200, 0.25);
    std::fill(two_level.begin(), two_level.begin() + 10, 3.0);
    spectra.push_back(two_level);

    const std::uint64_t draws = 40000;
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        const auto& sd = spectra[s];
        const auto g = DistributionSpec::gaussian(std::vector<double>(sd.size(), 0.0), sd);
        const auto want = gaussian_squared_norm_moments(sd);
        std::vector<double> sq(draws);
        std::vector<double> y(sd.size());
        for (std::uint64_t i = 0; i < draws; ++i) {
            Stream st(kSeed, 710 + s, i, stream_group::trials);
            sample(g, st, y);
            CompensatedSum acc;
            for (double v : y) acc.add(v * v);
            sq[i] = acc.value();
        }
        CompensatedSum sum;
        for (double v : sq) sum.add(v);
        const double mean = sum.value() / double(draws);
        CompensatedSum c2, c4;
        for (double v : sq) {
            const double r = v - mean;
            c2.add(r * r);
            c4.add(r * r * r * r);
        }
        const double var = c2.value() / double(draws - 1);
        const double m4 = c4.value() / double(draws);
        const double se_mean = std::sqrt(var / double(draws));
        const double se_var = std::sqrt(std::max(0.0, m4 - var * var) / double(draws));
        out.fp.add(mean);
        out.fp.add(var);
        out.detail << "spectrum " << s << ": mean " << fmt(mean) << "/" << fmt(want.mean) << " var "
                   << fmt(var) << "/" << fmt(want.variance) << "; ";
        out.require(std::abs(mean - want.mean) <= 4.0 * se_mean, "mean within 4 SE, spectrum " + std::to_string(s));
        out.require(std::abs(var - want.variance) <= 4.0 * se_var, "variance within 4 SE, spectrum " + std::to_string(s));
    }
}

// Criterion 9: stable-volume and largeness spot values.
void volume_arithmetic(Outcome& out, const Execution&) {
    const double v1 = stable_volume_lower_bound(0.01, 0.995, 1.0);
    const double want1 = (0.01 + 0.995 - 1.0) / 0.995;
    const double l1 = largeness_ratio(0.9, 500, 0.005);
    const double want_l = 500.0 * std::log(0.9) - std::log(0.005);
    out.fp.add(v1);
    out.fp.add(l1);
    out.detail << "volume=" << fmt(v1, 8) << " log-ratio=" << fmt(l1, 8) << "; ";
    out.require(rel_err(v1, want1) <= 1e-12, "volume at (0.01, 0.995, 1)");
    out.require(std::abs(v1 - 0.0050251) < 5e-8, "volume rounds to 0.0050251");
    out.require(rel_err(l1, want_l) <= 1e-12, "log-ratio at (0.9, 500, 0.005)");
    out.require(std::abs(l1 + 47.38) < 5e-3, "log-ratio rounds to -47.38");
}

struct Definition {
    int id;
    const char* title;
    double time_limit;
    void (*body)(Outcome&, const Execution&);
};

const std::vector<Definition>& definitions() {
    static const std::vector<Definition> defs{
        {1, "closed-form instability oracle (d=1, n=2)", 5.0, closed_form_oracle},
        {2, "Hoeffding deviation and instability bound validity", 120.0, hoeffding_validity},
        {3, "instability trend in d with n(d)=d", 600.0, instability_trend},
        {4, "exponential-n stable query fraction (d=6)", 1800.0, exponential_stability},
        {5, "E[Z]/d^(1/p) lower bound floor of 1/100", 1.0, ez_floor},
        {6, "unit-ball volume machinery", 1.0, ball_machinery},
        {7, "Gaussian Chebyshev validity and moments", 120.0, gaussian_validity},
        {9, "stable-volume and largeness arithmetic", 1.0, volume_arithmetic},
    };
    return defs;
}

CriterionResult execute(const Definition& def, const Execution& exec) {
    CriterionResult r;
    r.id = def.id;
    r.title = def.title;
    r.time_limit = def.time_limit;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        def.body(out, exec);
    } catch (const std::exception& e) {
        out.passed = false;
        out.detail << "threw: " << e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.time_limit > 0.0 && r.seconds >= r.time_limit) {
        out.passed = false;
        out.detail << "FAILED runtime " << fmt(r.seconds, 3) << "s >= " << r.time_limit << "s; ";
    }
    r.passed = out.passed;
    r.detail = out.detail.str();
    r.fingerprint = out.fp.str();
    return r;
}

}  // namespace

CriterionResult run_criterion(int id, const Execution& exec) {
    for (const auto& def : definitions())
        if (def.id == id) return execute(def, exec);
    throw std::invalid_argument("no runnable criterion " + std::to_string(id));
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
    auto wanted = [&](int id) {
        return options.only.empty() ||
               std::find(options.only.begin(), options.only.end(), id) != options.only.end();
    };
    std::vector<CriterionResult> results;
    std::map<int, std::string> first_pass;
    auto emit = [&](CriterionResult r) {
        if (options.on_result) options.on_result(r);
        results.push_back(std::move(r));
    };
    for (const auto& def : definitions()) {
        if (def.id > 8) continue;
        if (!wanted(def.id) && !(wanted(8) && def.id <= 4)) continue;
        auto r = execute(def, options.exec);
        first_pass[def.id] = r.fingerprint;
        if (wanted(def.id)) emit(std::move(r));
    }
    if (wanted(8)) {
        CriterionResult r;
        r.id = 8;
        r.title = "bit-identical aggregates at workers " +
                  std::to_string(options.exec.resolved_workers()) + " and " +
                  std::to_string(options.replay_workers);
        r.passed = true;
        const auto start = std::chrono::steady_clock::now();
        std::ostringstream detail;
        for (int id = 1; id <= 4; ++id) {
            const auto replay = run_criterion(id, Execution::parallel(options.replay_workers));
            const bool same = !replay.fingerprint.empty() && replay.fingerprint == first_pass[id];
            detail << "criterion " << id << (same ? " identical" : " DIFFERS") << "; ";
            r.passed = r.passed && same;
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        r.detail = detail.str();
        emit(std::move(r));
    }
    for (const auto& def : definitions())
        if (def.id > 8 && wanted(def.id)) emit(execute(def, options.exec));
    return results;
}

}  // namespace nnstab
