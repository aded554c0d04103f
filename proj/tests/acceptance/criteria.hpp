#pragma once

#include <string>

namespace neatnav::acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome xor_sanity();
Outcome mini_indoor_beats_greedy();
Outcome exploration_ablation();
Outcome transfer_head_start();
Outcome finetune_non_regression();
Outcome fitness_arithmetic();
Outcome elitism_monotonicity();
Outcome raycast_oracle();
Outcome determinism_and_parallelism();
Outcome batched_activation();

int worker_count();

}  // namespace neatnav::acceptance
