#include "neatnav/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "neatnav/config.hpp"
#include "neatnav/errors.hpp"
#include "neatnav/evolve.hpp"
#include "neatnav/genome.hpp"
#include "neatnav/network.hpp"
#include "neatnav/runner.hpp"
#include "neatnav/world.hpp"

namespace fs = std::filesystem;

namespace neatnav {

std::uint64_t eval_trial_seed(std::uint64_t master_seed, int trial) {
    return derive_seed({master_seed ^ kEvalSeedXor, static_cast<std::uint64_t>(trial)});
}

namespace {

struct CommonArgs {
    std::string scenario;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out;
    bool no_exploration = false;
    bool no_dynamic = false;
};

struct TrainArgs {
    std::string params;
    int generations = 0;
    std::optional<int> checkpoint_every;
    std::optional<int> episodes;
    std::string champion;  // transfer only
};

struct EvalArgs {
    std::string policy;
    int trials = 50;
    bool log = false;
};

struct FinetuneArgs {
    std::string policy;
    long steps = -1;
    int episodes = 5;
};

struct ReplayArgs {
    std::string log;
    std::optional<std::uint64_t> seed;
    std::string out;
};

ScenarioConfig load_scenario(const CommonArgs& c) {
    ScenarioConfig cfg = load_scenario_config(c.scenario);
    if (c.no_exploration) cfg.exploration_reward = false;
    if (c.no_dynamic) cfg.dynamic_obstacles = false;
    return cfg;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
    if (!f) throw Error("write failed: " + path.string());
}

// Written before any computation. Config texts are embedded so the manifest
// alone reproduces the run.
void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::string>& args,
                    const CommonArgs& c, const ScenarioConfig& scenario,
                    const std::optional<TrainingConfig>& training, const std::string& params_path) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["args"] = args;
    j["scenario_path"] = c.scenario;
    j["scenario"] = to_text(scenario);
    j["params_path"] = params_path;
    j["params"] = training ? to_text(*training) : std::string();
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["out"] = c.out;
    j["started"] = timestamp();
    j["version"] = kArtifactVersion;
    write_file(dir / "manifest.json", j.dump(2) + "\n");
}

fs::path prepare_out(const std::string& out) {
    if (out.empty()) throw std::invalid_argument("--out is required");
    fs::create_directories(out);
    return fs::path(out);
}

Genome load_champion(const std::string& path) {
    if (path.empty()) throw std::invalid_argument("--policy must name a champion genome file");
    return load_genome(path);
}

void check_width(const Genome& g, const ScenarioConfig& cfg) {
    const int want = observation_width(cfg);
    if (g.n_inputs != want || g.n_outputs != kActionOutputs)
        throw DimensionError("genome has " + std::to_string(g.n_inputs) + " inputs and " +
                             std::to_string(g.n_outputs) + " outputs; scenario expects " +
                             std::to_string(want) + " inputs and " + std::to_string(kActionOutputs) +
                             " outputs");
}

int run_training(const std::string& command, const std::vector<std::string>& args, const CommonArgs& c,
                 const TrainArgs& t, std::ostream& out) {
    if (t.generations < 1) throw std::invalid_argument("--generations must be at least 1");
    const ScenarioConfig scenario = load_scenario(c);
    TrainingConfig tc = t.params.empty() ? TrainingConfig{} : load_training_config(t.params);
    if (t.checkpoint_every) tc.checkpoint_every = *t.checkpoint_every;
    if (t.episodes) tc.episodes_per_genome = *t.episodes;
    if (tc.episodes_per_genome < 1) throw std::invalid_argument("episodes per genome must be at least 1");
    if (tc.checkpoint_every < 0) throw std::invalid_argument("--checkpoint-every must be non-negative");
    tc.evolve.validate();

    const bool transfer = command == "transfer";
    std::optional<Genome> source;
    if (transfer) {
        source = load_champion(t.champion);
        check_width(*source, scenario);
    }

    const fs::path dir = prepare_out(c.out);
    write_manifest(dir, command, args, c, scenario, tc, t.params);
    if (tc.checkpoint_every > 0) fs::create_directories(dir / "checkpoints");

    const int width = observation_width(scenario);
    RunOptions opts;
    opts.n_inputs = width;
    opts.n_outputs = kActionOutputs;
    if (source) {
        InnovationRegistry seeding;
        Random rng(derive_seed({c.seed, 0x7a25f3e7ULL}));
        opts.initial_population = seed_from_champion(*source, tc.evolve.pop_size, width, kActionOutputs,
                                                     tc.evolve.mutation_at(0), seeding, rng);
    }

    std::ofstream stats(dir / "stats.csv", std::ios::binary);
    if (!stats) throw Error("cannot write stats.csv");
    stats << "generation,best_fitness,mean_fitness,species_count,champion_nodes,champion_connections,reinjected,"
             "transfer\n";

    std::optional<Genome> best;
    opts.on_generation = [&](const GenerationStats& s, std::span<const Genome> pop) {
        if (s.generation == 0) {
            std::string dump;
            for (const auto& g : pop) dump += to_text(g);
            write_file(dir / "population_gen0.txt", dump);
        }
        if (!best || s.best_fitness > *best->fitness) best = s.champion;
        stats << s.generation << ',' << format_double(s.best_fitness) << ',' << format_double(s.mean_fitness)
              << ',' << s.species_count << ',' << s.champion_nodes() << ',' << s.champion_connections() << ','
              << (s.reinjected ? "true" : "false") << ',' << (transfer ? "true" : "false") << '\n';
        stats.flush();
        const bool last = s.generation + 1 == t.generations;
        if (tc.checkpoint_every > 0 && ((s.generation + 1) % tc.checkpoint_every == 0 || last)) {
            std::ostringstream name;
            name << "gen_" << std::setw(4) << std::setfill('0') << s.generation << ".genome";
            save_genome(*best, dir / "checkpoints" / name.str());
        }
        out << "gen " << s.generation << " best " << format_double(s.best_fitness) << " mean "
            << format_double(s.mean_fitness) << " species " << s.species_count << '\n';
    };

    const PopulationEvaluator evaluator = [&](std::span<const Genome> genomes, int gen) {
        EvalPlan plan;
        plan.master_seed = c.seed;
        plan.generation = gen;
        plan.episodes_per_genome = tc.episodes_per_genome;
        plan.workers = c.workers;
        plan.seed_mode = tc.seed_mode;
        return evaluate_population(genomes, scenario, plan);
    };

    const RunResult result = run_evolution(evaluator, tc.evolve, t.generations, c.seed, std::move(opts));
    save_genome(result.champion, dir / "champion.genome");
    out << "champion fitness " << format_double(*result.champion.fitness) << " written to "
        << (dir / "champion.genome").string() << '\n';
    return 0;
}

int run_eval(const std::vector<std::string>& args, const CommonArgs& c, const EvalArgs& e, std::ostream& out) {
    if (e.trials < 1) throw std::invalid_argument("--trials must be at least 1");
    if (e.policy.empty()) throw std::invalid_argument("--policy is required");
    const ScenarioConfig scenario = load_scenario(c);
    const auto baseline = parse_baseline(e.policy);
    std::optional<Genome> genome;
    if (!baseline) {
        genome = load_champion(e.policy);
        check_width(*genome, scenario);
    }

    const fs::path dir = prepare_out(c.out);
    write_manifest(dir, "eval", args, c, scenario, std::nullopt, "");

    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < e.trials; ++i) seeds.push_back(eval_trial_seed(c.seed, i));
    EpisodeOptions eo;
    eo.record_actions = e.log;
    eo.record_trajectory = e.log;
    const std::vector<EpisodeResult> results =
        baseline ? evaluate_baseline(*baseline, scenario, seeds, c.workers, eo)
                 : evaluate_network(decode(*genome), scenario, seeds, c.workers, eo);

    std::string trials;
    for (std::size_t i = 0; i < results.size(); ++i) trials += result_json(results[i], static_cast<int>(i)) + "\n";
    write_file(dir / "trials.jsonl", trials);

    if (e.log) {
        fs::create_directories(dir / "logs");
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            std::ostringstream log;
            write_action_log(log, {scenario.kind, r.seed, r.steps, r.fitness, r.actions});
            write_file(dir / "logs" / ("trial_" + std::to_string(i) + ".log"), log.str());
            std::string traj;
            for (const auto& p : r.trajectory) traj += trajectory_json(p) + "\n";
            write_file(dir / "logs" / ("trial_" + std::to_string(i) + ".jsonl"), traj);
        }
    }

    const Metrics m = compute_metrics(results, results.front().total_cells);
    const std::string label = baseline ? std::string(to_string(*baseline)) : fs::path(e.policy).filename().string();
    const std::string csv = metrics_csv_header() + "\n" + metrics_csv_row(label, m) + "\n";
    write_file(dir / "metrics.csv", csv);
    out << csv;
    return 0;
}

int run_finetune(const std::vector<std::string>& args, const CommonArgs& c, const FinetuneArgs& f,
                 std::ostream& out) {
    if (f.steps < 0) throw std::invalid_argument("--steps must be given and non-negative");
    if (f.episodes < 1) throw std::invalid_argument("--episodes must be at least 1");
    const ScenarioConfig scenario = load_scenario(c);
    const Genome genome = load_champion(f.policy);
    check_width(genome, scenario);

    const fs::path dir = prepare_out(c.out);
    write_manifest(dir, "finetune", args, c, scenario, std::nullopt, "");

    Random rng(derive_seed({c.seed, 0xf17e7a11ULL}));
    FinetuneOptions fo;
    fo.batch_episodes = f.episodes;
    fo.workers = c.workers;
    const WeightSearchResult res = finetune_champion(genome, scenario, f.steps, rng, fo);
    save_genome(res.genome, dir / "tuned.genome");

    nlohmann::ordered_json j;
    j["steps_budget"] = f.steps;
    j["steps_used"] = res.steps_used;
    j["iterations"] = res.iterations;
    j["accepted"] = res.accepted;
    j["initial_fitness"] = res.initial_fitness;
    j["final_fitness"] = res.final_fitness;
    write_file(dir / "finetune.json", j.dump(2) + "\n");
    out << "batch fitness " << format_double(res.initial_fitness) << " -> " << format_double(res.final_fitness)
        << " (" << res.accepted << " accepted, " << res.steps_used << " steps)\n";
    return 0;
}

int run_replay(const CommonArgs& c, const ReplayArgs& r, std::ostream& out, std::ostream& err) {
    if (r.log.empty()) throw std::invalid_argument("--log is required");
    const ScenarioConfig scenario = load_scenario(c);
    std::ifstream in(r.log, std::ios::binary);
    if (!in) throw Error("cannot read " + r.log);
    ActionLog log;
    try {
        log = read_action_log(in);
    } catch (const FormatError& e) {
        throw FormatError::with_context(r.log, e);
    }
    if (log.kind != scenario.kind)
        throw std::invalid_argument("log records scenario " + std::string(to_string(log.kind)) +
                                    " but the config is " + std::string(to_string(scenario.kind)));
    const std::uint64_t seed = r.seed.value_or(log.seed);
    ScenarioConfig cfg = scenario;
    cfg.seed = seed;
    const World world = build_scenario(cfg);
    ReplayPolicy policy(log.actions);
    EpisodeOptions eo;
    eo.record_trajectory = true;
    const EpisodeResult res = run_episode(policy, world, eo);

    if (!r.out.empty()) {
        const fs::path dir = prepare_out(r.out);
        std::string traj;
        for (const auto& p : res.trajectory) traj += trajectory_json(p) + "\n";
        write_file(dir / "trajectory.jsonl", traj);
    }
    out << "recorded fitness " << format_double(log.fitness) << " replayed " << format_double(res.fitness)
        << " steps " << res.steps << '\n';
    if (res.fitness != log.fitness || res.steps != log.steps) {
        err << "error: replay mismatch (seed " << seed << "): recorded fitness " << format_double(log.fitness)
            << " over " << log.steps << " steps, replay gave " << format_double(res.fitness) << " over "
            << res.steps << " steps\n";
        return 3;
    }
    return 0;
}

void add_common(CLI::App* cmd, CommonArgs& c, bool needs_out) {
    cmd->add_option("--scenario", c.scenario, "Scenario config file")->required();
    cmd->add_option("--seed", c.seed, "Master seed");
    cmd->add_option("--workers", c.workers, "Evaluation threads")->check(CLI::PositiveNumber);
    auto* o = cmd->add_option("--out", c.out, "Output directory");
    if (needs_out) o->required();
    cmd->add_flag("--no-exploration-reward", c.no_exploration, "Zero the new-cell reward");
    cmd->add_flag("--no-dynamic-obstacles", c.no_dynamic, "Freeze moving obstacles and hazards");
}

void add_training(CLI::App* cmd, TrainArgs& t) {
    cmd->add_option("--params", t.params, "Training config file");
    cmd->add_option("--generations", t.generations, "Generations to run")->required();
    cmd->add_option("--checkpoint-every", t.checkpoint_every, "Champion checkpoint period (0 disables)");
    cmd->add_option("--episodes", t.episodes, "Episodes per genome (overrides the params file)");
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neuroevolution of navigation controllers for simulated search rovers", "neatnav"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kArtifactVersion);

    CommonArgs common;
    TrainArgs train;
    EvalArgs eval;
    FinetuneArgs finetune;
    ReplayArgs replay;

    auto* train_cmd = app.add_subcommand("train", "Evolve a controller from random minimal networks");
    add_common(train_cmd, common, true);
    add_training(train_cmd, train);

    auto* transfer_cmd = app.add_subcommand("transfer", "Evolve starting from an existing champion");
    add_common(transfer_cmd, common, true);
    add_training(transfer_cmd, train);
    transfer_cmd->add_option("--policy", train.champion, "Champion genome to seed from")->required();

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a champion or baseline on held-out layouts");
    add_common(eval_cmd, common, true);
    eval_cmd->add_option("--policy", eval.policy, "Champion genome file or baseline name")->required();
    eval_cmd->add_option("--trials", eval.trials, "Number of trials");
    eval_cmd->add_flag("--log", eval.log, "Write action logs and trajectories per trial");

    auto* ft_cmd = app.add_subcommand("finetune", "Optimize champion weights with fixed topology");
    add_common(ft_cmd, common, true);
    ft_cmd->add_option("--policy", finetune.policy, "Champion genome file")->required();
    ft_cmd->add_option("--steps", finetune.steps, "Simulated step budget")->required();
    ft_cmd->add_option("--episodes", finetune.episodes, "Episodes in the fine-tuning batch");

    auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded action log and export its trajectory");
    replay_cmd->add_option("--scenario", common.scenario, "Scenario config file")->required();
    replay_cmd->add_option("--log", replay.log, "Action log file")->required();
    replay_cmd->add_option("--seed", replay.seed, "Layout seed (defaults to the one in the log)");
    replay_cmd->add_option("--out", replay.out, "Directory for trajectory.jsonl");
    replay_cmd->add_flag("--no-exploration-reward", common.no_exploration, "Zero the new-cell reward");
    replay_cmd->add_flag("--no-dynamic-obstacles", common.no_dynamic, "Freeze moving obstacles and hazards");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (train_cmd->parsed()) return run_training("train", args, common, train, out);
        if (transfer_cmd->parsed()) return run_training("transfer", args, common, train, out);
        if (eval_cmd->parsed()) return run_eval(args, common, eval, out);
        if (ft_cmd->parsed()) return run_finetune(args, common, finetune, out);
        if (replay_cmd->parsed()) return run_replay(common, replay, out, err);
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace neatnav
