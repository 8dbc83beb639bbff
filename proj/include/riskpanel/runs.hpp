#pragma once

#include <map>
#include <string>
#include <vector>

namespace riskpanel {

// Flat dotted-key configuration; file values first, then command-line
// overrides. All commands consume one of these, so a manifest can replay any
// run exactly.
struct RunConfig {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;
    std::string require(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    void set(const std::string& key, const std::string& value) { kv[key] = value; }
};

// `key = value` lines with flat dotted keys; `#` comments.
RunConfig load_config_file(const std::string& path);
void apply_overrides(RunConfig& config, const std::vector<std::string>& pairs);  // "key=value"

std::uint64_t config_hash(const RunConfig& config);

// Executes one subcommand (synth, preprocess, horserace, explain, connect,
// report) with a resolved config. Returns a process exit code: 0 success,
// 2 data validation failure, 3 numerical failure. Writes a manifest.json
// into the run directory.
int run_command(const std::string& command, RunConfig config);

// Re-runs the command recorded in a manifest; out_override (when nonempty)
// redirects outputs. Replays are byte-identical on the CSV artifacts.
int replay_manifest(const std::string& manifest_path, const std::string& out_override);

}  // namespace riskpanel
