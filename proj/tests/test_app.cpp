#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nnstab/app.hpp"

using namespace nnstab;

namespace {

const std::filesystem::path kFixtures = NNSTAB_FIXTURE_DIR;

RunConfig from_text(const std::string& text) { return parse_config_text(text); }

double number(const Table& t, std::size_t row, std::string_view column) {
    return std::get<double>(t.at(row, column));
}

struct Captured {
    int code;
    std::string out;
    std::string err;
};

Captured run_captured(Subcommand sub, const std::optional<std::filesystem::path>& config,
                      RunOptions options = {}) {
    std::ostringstream out, err;
    options.out = &out;
    options.err = &err;
    const int code = run(sub, config, options);
    return {code, out.str(), err.str()};
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST(Subcommand, Names) {
    EXPECT_EQ(subcommand_from_string("stable-region"), Subcommand::stable_region);
    EXPECT_EQ(to_string(Subcommand::check), "check");
    EXPECT_FALSE(subcommand_from_string("plot").has_value());
}

TEST(Bounds, LargeDimensionExample) {
    const auto c = from_text(R"({
      "distribution": {"family": "uniform-cube"}, "d": 100000,
      "size_rule": {"family": "constant", "n": 1000}, "p": 2, "epsilon": 0.1})");
    const auto r = execute(Subcommand::bounds, c, Execution::serial());
    ASSERT_EQ(r.table.rows().size(), 1u);
    EXPECT_NEAR(number(r.table, 0, "instability_lower_bound"), 0.99286942326299627, 1e-12);
    EXPECT_NEAR(number(r.table, 0, "deviation_bound"), 7.1560951960366007e-6, 1e-17);
    EXPECT_EQ(number(r.table, 0, "beta"), 1.0);
    EXPECT_EQ(std::get<bool>(r.table.at(0, "deviation_clamped")), false);
}

TEST(Estimate, TwoPointsOnTheLine) {
    const auto c = from_text(R"({
      "distribution": {"family": "uniform-cube"}, "d": 1,
      "size_rule": {"family": "constant", "n": 2}, "p": 1, "epsilon": 1,
      "query": {"kind": "corner"}, "trials": 20000, "seed": 3})");
    const auto r = execute(Subcommand::estimate, c, Execution::serial());
    ASSERT_EQ(r.table.rows().size(), 1u);
    EXPECT_EQ(std::get<std::string>(r.table.at(0, "quantity")), "instability");
    EXPECT_NEAR(number(r.table, 0, "estimate"), 0.5, 0.015);
    EXPECT_LE(number(r.table, 0, "ci_low"), number(r.table, 0, "estimate"));
    EXPECT_EQ(std::get<std::uint64_t>(r.table.at(0, "seed")), 3u);
}

TEST(Estimate, BackendsAgree) {
    const auto c = from_text(R"({
      "distribution": {"family": "slab-mixture", "weight": 0.3, "axis": 1}, "d": 6,
      "size_rule": {"family": "constant", "n": 20}, "epsilon": 0.2, "trials": 300,
      "estimators": ["instability", "deviation", "z-ratio", "relative-variance", "relative-contrast"]})");
    const auto a = execute(Subcommand::estimate, c, Execution::serial());
    const auto b = execute(Subcommand::estimate, c, Execution::parallel(4));
    EXPECT_EQ(a.table.rows(), b.table.rows());
    EXPECT_EQ(a.table.rows().size(), 5u);
}

TEST(Sweep, OneRowPerPoint) {
    const auto c = parse_config(kFixtures / "d_sweep.json");
    const auto r = execute(Subcommand::sweep, c, Execution::serial());
    ASSERT_EQ(r.table.rows().size(), 4u);
    EXPECT_FALSE(r.runtime_error.has_value());
    const double ds[] = {2, 16, 128, 1024};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(number(r.table, i, "axis_value"), ds[i]);
        EXPECT_EQ(std::get<std::uint64_t>(r.table.at(i, "stream_id")), 40u + i);
    }
}

TEST(Sweep, BoundsOnlyWithoutEstimators) {
    const auto c = from_text(R"({
      "distribution": {"family": "uniform-cube"}, "d": 10,
      "size_rule": {"family": "constant", "n": 100}, "epsilon": 0.1, "estimators": [],
      "sweep": {"axis": "epsilon", "values": [0.1, 0.2, 0.4]}})");
    const auto r = execute(Subcommand::sweep, c, Execution::serial());
    ASSERT_EQ(r.table.rows().size(), 3u);
    EXPECT_EQ(r.table.columns(), bound_columns());
}

TEST(Sweep, MemoryCapTruncates) {
    const auto path = write_temp("nnstab_trunc.json", R"({
      "distribution": {"family": "uniform-cube"}, "d": 2,
      "size_rule": {"family": "polynomial", "c": 1, "k": 1}, "epsilon": 0.2, "trials": 50,
      "memory_cap": 1000, "sweep": {"axis": "d", "values": [2, 16, 128]}})");
    const auto r = run_captured(Subcommand::sweep, path);
    EXPECT_EQ(r.code, exit_code::runtime);
    EXPECT_NE(r.out.find("# truncated:"), std::string::npos);
    EXPECT_NE(r.err.find("\"runtime\""), std::string::npos);
    // Rows before the failing point survive.
    std::istringstream lines(r.out);
    int count = 0;
    for (std::string line; std::getline(lines, line);) ++count;
    EXPECT_EQ(count, 4);
}

TEST(Check, NegativeControlFails) {
    const auto c = parse_config(kFixtures / "corrupted_tail.json");
    const auto r = execute(Subcommand::check, c, Execution::serial());
    EXPECT_TRUE(r.check_failed);
    EXPECT_EQ(run_captured(Subcommand::check, kFixtures / "corrupted_tail.json").code,
              exit_code::check_failed);
}

TEST(Check, ValidConfigPasses) {
    const auto r = run_captured(Subcommand::check, kFixtures / "check_ok.json");
    EXPECT_EQ(r.code, exit_code::ok) << r.err;
    EXPECT_EQ(r.out.find("false"), std::string::npos);
}

TEST(Run, ValidationErrorJson) {
    const auto r = run_captured(Subcommand::bounds, kFixtures / "bad_zeta.json");
    EXPECT_EQ(r.code, exit_code::validation);
    const auto j = nlohmann::json::parse(r.err);
    EXPECT_EQ(j["error"]["kind"], "validation");
    EXPECT_FALSE(j["error"]["violations"].empty());
}

TEST(Run, ParseErrorJson) {
    const auto path = write_temp("nnstab_broken.json", "{\"d\": 2,,}");
    const auto r = run_captured(Subcommand::bounds, path);
    EXPECT_EQ(r.code, exit_code::validation);
    EXPECT_EQ(nlohmann::json::parse(r.err)["error"]["kind"], "parse");
}

TEST(Run, StableRegionRejectsGaussian) {
    const auto path = write_temp("nnstab_gauss.json", R"({
      "distribution": {"family": "gaussian"}, "d": 3,
      "size_rule": {"family": "constant", "n": 5}, "epsilon": 0.1})");
    const auto r = run_captured(Subcommand::stable_region, path);
    EXPECT_EQ(r.code, exit_code::validation);
}

TEST(Run, StdoutAndManifest) {
    const auto r = run_captured(Subcommand::bounds, kFixtures / "minimal.json");
    ASSERT_EQ(r.code, exit_code::ok);
    EXPECT_EQ(r.out.rfind("axis,", 0), 0u);
    const auto m = nlohmann::json::parse(r.err);
    EXPECT_EQ(m["subcommand"], "bounds");
    EXPECT_EQ(m["config_digest"], config_digest(parse_config(kFixtures / "minimal.json")));
}

TEST(Run, OutDirFilesAndSeedOverride) {
    const auto dir = std::filesystem::temp_directory_path() / "nnstab_app_out";
    std::filesystem::remove_all(dir);
    RunOptions opts;
    opts.out_dir = dir;
    opts.format = Format::json;
    opts.seed = 99;
    const auto r = run_captured(Subcommand::estimate, kFixtures / "minimal.json", opts);
    ASSERT_EQ(r.code, exit_code::ok) << r.err;

    auto c = parse_config(kFixtures / "minimal.json");
    c.seed = 99;
    const auto digest = config_digest(c);
    const auto results = dir / ("estimate-" + digest + ".json");
    const auto manifest = dir / ("estimate-" + digest + ".manifest.json");
    ASSERT_TRUE(std::filesystem::exists(results));
    ASSERT_TRUE(std::filesystem::exists(manifest));
    std::ifstream rin(results), min(manifest);
    const auto rows = nlohmann::json::parse(rin);
    const auto m = nlohmann::json::parse(min);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0]["seed"], 99);
    EXPECT_EQ(m["seed"], 99);
    EXPECT_EQ(m["outputs"].size(), 1u);
    std::filesystem::remove_all(dir);
}

TEST(Run, UnwritableOutDir) {
    RunOptions opts;
    opts.out_dir = "/proc/nnstab-cannot-write";
    const auto r = run_captured(Subcommand::bounds, kFixtures / "minimal.json", opts);
    EXPECT_EQ(r.code, exit_code::runtime);
}
