// nnstab {bounds|estimate|stable-region|sweep|check} --config <path>
//        [--out <dir>] [--format csv|json|plot-data] [--seed <u64>] [--workers <n>]

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "nnstab/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Nearest-neighbor instability bounds and Monte Carlo estimators"};
    app.set_version_flag("--version", std::string("nnstab ") + NNSTAB_VERSION);
    app.require_subcommand(1, 1);

    std::string config;
    std::string out_dir;
    std::string format = "csv";
    std::uint64_t seed = 0;
    int workers = 0;

    const std::map<std::string, std::string> help{
        {"bounds", "closed-form bound report for every query"},
        {"estimate", "Monte Carlo estimators named in the config, paired with bounds"},
        {"stable-region", "classify uniform queries and estimate the stable fraction"},
        {"sweep", "iterate the sweep axis, one row per point"},
        {"check", "bound-validity checks; without --config runs the full battery"},
    };
    std::map<CLI::App*, nnstab::Subcommand> subs;
    for (const auto& [name, text] : help) {
        auto* sub = app.add_subcommand(name, text);
        sub->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "directory for result and manifest files");
        sub->add_option("--format", format, "csv, json or plot-data")
            ->check(CLI::IsMember({"csv", "json", "plot-data"}));
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--workers", workers, "worker threads (default: NNSTAB_WORKERS or all cores)")
            ->check(CLI::PositiveNumber);
        subs[sub] = *nnstab::subcommand_from_string(name);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << nnstab::error_json("usage", e.what()) << "\n";
        return nnstab::exit_code::validation;
    }

    CLI::App* chosen = app.get_subcommands().front();
    nnstab::RunOptions options;
    options.format = *nnstab::format_from_string(format);
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (chosen->count("--seed")) options.seed = seed;
    if (workers > 0) options.exec = nnstab::Execution::parallel(workers);

    std::optional<std::filesystem::path> config_path;
    if (!config.empty()) config_path = config;
    return nnstab::run(subs.at(chosen), config_path, options);
}
