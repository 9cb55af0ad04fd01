#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frbm/cd.hpp"
#include "frbm/fw.hpp"

namespace frbm {

/// Settings for the annealed evaluator as they appear in config files; the
/// schedule stays symbolic ("default", "uniform:N", or "@file") until the
/// command that needs it materializes the ladder.
struct AisSettings {
    int runs = 100;
    std::string schedule = "default";
    std::uint64_t seed = 0;
};

struct DataConfig {
    std::int64_t validation_count = 0;
    std::uint64_t seed = 0;
};

struct FullConfig {
    FwConfig fw;
    CdConfig cd;
    AisSettings ais;
    DataConfig data;
};

/// Parses `key = value` lines under [fw], [cd], [ais], [data] sections, with
/// `#` comments. Unknown sections or keys and malformed values are hard
/// errors naming the line; missing keys keep their defaults. Semantic
/// invariants (positive rates and the like) are enforced before returning.
FullConfig parse_config(const std::string& text);
FullConfig load_config(const std::string& path);

struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    std::string help;
};

/// Every known key with its current value, in schema order. Values are
/// rendered exactly as parse_config accepts them, so dump -> parse -> dump is
/// the identity; the manifest and --help listings are generated from this.
std::vector<ConfigEntry> dump_config(const FullConfig& cfg);

/// Human-readable key listing with defaults, for --help.
std::string config_help();

}  // namespace frbm
