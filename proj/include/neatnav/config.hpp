#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "neatnav/evolve.hpp"
#include "neatnav/runner.hpp"
#include "neatnav/world.hpp"

namespace neatnav {

// Key-value text files: `key = value` per line, `#` starts a comment. Errors
// are FormatError carrying the offending line.

ScenarioConfig parse_scenario_config(std::string_view text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
std::string to_text(const ScenarioConfig& config);

/// Evolution settings plus how genomes are evaluated during training.
struct TrainingConfig {
    EvolveParams evolve;
    int episodes_per_genome = 1;
    SeedMode seed_mode = SeedMode::per_genome;
    int checkpoint_every = 10;
};

/// `schedule = <first>-<last>:key=value,key=value` may repeat; each entry
/// starts from the base mutation settings.
TrainingConfig parse_training_config(std::string_view text);
TrainingConfig load_training_config(const std::filesystem::path& path);
std::string to_text(const TrainingConfig& config);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace neatnav
