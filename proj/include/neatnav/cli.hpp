#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace neatnav {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Evaluation layouts never overlap training ones: eval seeds hash the master
// seed XOR this constant.
inline constexpr std::uint64_t kEvalSeedXor = 0x5eed0fe7a11a7e57ULL;

std::uint64_t eval_trial_seed(std::uint64_t master_seed, int trial);

/// Entry point behind the `neatnav` tool. `args` excludes the program name.
/// Returns the process exit code: 0 on success, nonzero on any error.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace neatnav
