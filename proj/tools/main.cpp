#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/runs.hpp"

// Operator entry point. Each subcommand takes an optional config file of flat
// dotted keys plus any number of key=value overrides; flags win over file
// values. Exit codes: 0 success, 1 usage, 2 data validation, 3 numerical.
int main(int argc, char** argv) {
    CLI::App app{"panel forecasting and attribution toolkit"};
    app.require_subcommand(1);

    const std::vector<std::string> commands = {"synth",   "preprocess", "horserace",
                                               "explain", "connect",    "report"};
    struct Args {
        std::string config_file;
        std::string out;
        std::vector<std::string> sets;
    };
    std::map<std::string, Args> args;
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("-c,--config", args[name].config_file, "config file (key = value lines)");
        sub->add_option("-o,--out", args[name].out, "output directory");
        sub->add_option("-s,--set", args[name].sets, "override: key=value (repeatable)");
    }
    auto* replay = app.add_subcommand("replay", "re-run a recorded manifest");
    std::string manifest_path, replay_out;
    replay->add_option("manifest", manifest_path, "path to manifest.json")->required();
    replay->add_option("-o,--out", replay_out, "output directory override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (replay->parsed()) return riskpanel::replay_manifest(manifest_path, replay_out);
        for (const auto& name : commands) {
            if (!app.get_subcommand(name)->parsed()) continue;
            const Args& a = args[name];
            riskpanel::RunConfig config;
            if (!a.config_file.empty()) config = riskpanel::load_config_file(a.config_file);
            riskpanel::apply_overrides(config, a.sets);
            if (!a.out.empty()) config.set("out", a.out);
            return riskpanel::run_command(name, config);
        }
    } catch (const riskpanel::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const riskpanel::NumericError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    }
    return 1;
}
