#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "criteria.hpp"

using namespace neatnav::acceptance;

namespace {

struct Criterion {
    const char* name;
    Outcome (*run)();
};

const std::vector<Criterion> kCriteria = {
    {"xor sanity", xor_sanity},
    {"mini indoor champion beats greedy_rooms", mini_indoor_beats_greedy},
    {"exploration reward ablation", exploration_ablation},
    {"transfer head start", transfer_head_start},
    {"fine-tuning non-regression", finetune_non_regression},
    {"fitness arithmetic", fitness_arithmetic},
    {"elitism monotonicity", elitism_monotonicity},
    {"raycast oracle", raycast_oracle},
    {"determinism and parallelism", determinism_and_parallelism},
    {"batched vs scalar activation", batched_activation},
};

bool run_one(std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = kCriteria[i].run();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu (%s): %s  %s [%.1f s]\n", i + 1, kCriteria[i].name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> which;
    for (int a = 1; a < argc; ++a) {
        const int n = std::atoi(argv[a]);
        if (n < 1 || n > static_cast<int>(kCriteria.size())) {
            std::fprintf(stderr, "usage: acceptance [criterion 1-%zu ...]\n", kCriteria.size());
            return 2;
        }
        which.push_back(static_cast<std::size_t>(n - 1));
    }
    if (which.empty())
        for (std::size_t i = 0; i < kCriteria.size(); ++i) which.push_back(i);
    std::printf("workers: %d\n", worker_count());
    bool all = true;
    for (const auto i : which) all = run_one(i) && all;
    return all ? 0 : 1;
}
