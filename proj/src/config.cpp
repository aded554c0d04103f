#include "neatnav/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "neatnav/errors.hpp"

namespace neatnav {

namespace {

struct Entry {
    std::string key;
    std::string value;
    int line;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<Entry> split_entries(std::string_view text) {
    std::vector<Entry> out;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw FormatError("expected 'key = value'", line_no);
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw FormatError("missing key before '='", line_no);
        if (value.empty()) throw FormatError("missing value for '" + key + "'", line_no);
        if (key != "schedule" && !seen.insert(key).second)
            throw FormatError("duplicate key '" + key + "'", line_no);
        out.push_back({std::move(key), std::move(value), line_no});
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, int line,
                            const std::string& expected) {
    throw FormatError("bad value '" + value + "' for '" + key + "' (expected " + expected + ")", line);
}

double as_double(const std::string& key, const std::string& v, int line) {
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out))
        bad_value(key, v, line, "a number");
    return out;
}

long long as_int(const std::string& key, const std::string& v, int line) {
    long long out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) bad_value(key, v, line, "an integer");
    return out;
}

std::uint64_t as_u64(const std::string& key, const std::string& v, int line) {
    std::uint64_t out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) bad_value(key, v, line, "a non-negative integer");
    return out;
}

bool as_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, v, line, "true or false");
}

double positive(const std::string& key, const std::string& v, int line) {
    const double d = as_double(key, v, line);
    if (!(d > 0.0)) bad_value(key, v, line, "a positive number");
    return d;
}

double probability(const std::string& key, const std::string& v, int line) {
    const double d = as_double(key, v, line);
    if (d < 0.0 || d > 1.0) bad_value(key, v, line, "a probability in [0, 1]");
    return d;
}

int count(const std::string& key, const std::string& v, int line, int lo) {
    const long long n = as_int(key, v, line);
    if (n < lo || n > 1'000'000'000) bad_value(key, v, line, "an integer >= " + std::to_string(lo));
    return static_cast<int>(n);
}

template <class Fn>
auto with_line(int line, Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what(), line);
    }
}

bool apply_mutation_key(MutationParams& m, const std::string& k, const std::string& v, int line) {
    if (k == "conn_add_prob") m.conn_add_prob = probability(k, v, line);
    else if (k == "conn_delete_prob") m.conn_delete_prob = probability(k, v, line);
    else if (k == "node_add_prob") m.node_add_prob = probability(k, v, line);
    else if (k == "node_delete_prob") m.node_delete_prob = probability(k, v, line);
    else if (k == "weight_mutate_rate") m.weight_mutate_rate = probability(k, v, line);
    else if (k == "weight_mutate_power") m.weight_mutate_power = as_double(k, v, line);
    else if (k == "weight_replace_rate") m.weight_replace_rate = probability(k, v, line);
    else if (k == "weight_init_min") m.init_range.lo = as_double(k, v, line);
    else if (k == "weight_init_max") m.init_range.hi = as_double(k, v, line);
    else if (k == "weight_min") m.weight_min = as_double(k, v, line);
    else if (k == "weight_max") m.weight_max = as_double(k, v, line);
    else if (k == "reenable_prob") m.reenable_prob = probability(k, v, line);
    else if (k == "activation_mutate_rate") m.activation_mutate_rate = probability(k, v, line);
    else return false;
    return true;
}

ScheduleEntry parse_schedule(const std::string& v, const MutationParams& base, int line) {
    const auto colon = v.find(':');
    const auto dash = v.find('-');
    if (colon == std::string::npos || dash == std::string::npos || dash > colon)
        bad_value("schedule", v, line, "<first>-<last>:key=value[,key=value]");
    ScheduleEntry e;
    e.first = count("schedule", std::string(trim(v.substr(0, dash))), line, 0);
    e.last = count("schedule", std::string(trim(v.substr(dash + 1, colon - dash - 1))), line, 0);
    if (e.first > e.last) bad_value("schedule", v, line, "first <= last");
    e.params = base;
    std::string rest = v.substr(colon + 1);
    std::stringstream ss(rest);
    std::string item;
    int n = 0;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) bad_value("schedule", v, line, "key=value overrides");
        const std::string k(trim(item.substr(0, eq)));
        const std::string val(trim(item.substr(eq + 1)));
        if (!apply_mutation_key(e.params, k, val, line))
            throw FormatError("unknown mutation key '" + k + "' in schedule", line);
        ++n;
    }
    if (n == 0) bad_value("schedule", v, line, "at least one override");
    with_line(line, [&] {
        e.params.validate();
        return 0;
    });
    return e;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view text) {
    const auto entries = split_entries(text);
    ScenarioKind kind = ScenarioKind::indoor_fire;
    for (const auto& e : entries) {
        if (e.key != "kind") continue;
        const auto k = parse_scenario_kind(e.value);
        if (!k) bad_value(e.key, e.value, e.line, "indoor_fire, outdoor_rescue or industrial_inspect");
        kind = *k;
    }
    ScenarioConfig c = ScenarioConfig::defaults(kind);
    int last_line = 0;
    for (const auto& e : entries) {
        const auto& k = e.key;
        const auto& v = e.value;
        last_line = std::max(last_line, e.line);
        if (k == "kind") continue;
        if (k == "arena_size") c.arena_size = positive(k, v, e.line);
        else if (k == "n_rooms") c.n_rooms = count(k, v, e.line, 2);
        else if (k == "n_targets" || k == "n_target_rooms" || k == "n_survivors" || k == "n_checkpoints")
            c.n_targets = count(k, v, e.line, 1);
        else if (k == "lidar_range") c.lidar_range = positive(k, v, e.line);
        else if (k == "allow_reverse") c.allow_reverse = as_bool(k, v, e.line);
        else if (k == "dynamic_obstacles" || k == "dynamic_obstacles_enabled")
            c.dynamic_obstacles = as_bool(k, v, e.line);
        else if (k == "episode_limit") c.episode_limit = positive(k, v, e.line);
        else if (k == "dt") c.dt = positive(k, v, e.line);
        else if (k == "seed") c.seed = as_u64(k, v, e.line);
        else if (k == "n_obstacles") c.n_obstacles = count(k, v, e.line, -1);
        else if (k == "exploration_reward") c.exploration_reward = as_bool(k, v, e.line);
        else if (k == "collision_cap") c.collision_cap = count(k, v, e.line, 1);
        else throw FormatError("unknown key '" + k + "'", e.line);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("invalid scenario: ") + e.what(), 0);
    }
    return c;
}

std::string to_text(const ScenarioConfig& c) {
    std::ostringstream os;
    os << "kind = " << to_string(c.kind) << '\n'
       << "arena_size = " << format_double(c.arena_size) << '\n';
    if (c.kind == ScenarioKind::indoor_fire) os << "n_rooms = " << c.n_rooms << '\n';
    os << "n_targets = " << c.n_targets << '\n'
       << "lidar_range = " << format_double(c.lidar_range) << '\n'
       << "allow_reverse = " << (c.allow_reverse ? "true" : "false") << '\n'
       << "dynamic_obstacles = " << (c.dynamic_obstacles ? "true" : "false") << '\n'
       << "episode_limit = " << format_double(c.episode_limit) << '\n'
       << "dt = " << format_double(c.dt) << '\n'
       << "seed = " << c.seed << '\n'
       << "n_obstacles = " << c.n_obstacles << '\n'
       << "exploration_reward = " << (c.exploration_reward ? "true" : "false") << '\n'
       << "collision_cap = " << c.collision_cap << '\n';
    return os.str();
}

TrainingConfig parse_training_config(std::string_view text) {
    const auto entries = split_entries(text);
    TrainingConfig tc;
    EvolveParams& p = tc.evolve;
    // Base mutation keys first so schedule entries inherit them regardless of order.
    for (const auto& e : entries) apply_mutation_key(p.mutation, e.key, e.value, e.line);
    for (const auto& e : entries) {
        const auto& k = e.key;
        const auto& v = e.value;
        if (apply_mutation_key(p.mutation, k, v, e.line)) continue;
        if (k == "pop_size") p.pop_size = count(k, v, e.line, 1);
        else if (k == "elitism") p.elitism = count(k, v, e.line, 0);
        else if (k == "fitness_threshold") p.fitness_threshold = as_double(k, v, e.line);
        else if (k == "stop_at_threshold") p.stop_at_threshold = as_bool(k, v, e.line);
        else if (k == "fitness_criterion") {
            if (v != "max") bad_value(k, v, e.line, "max");
        } else if (k == "compatibility_threshold") p.compatibility_threshold = positive(k, v, e.line);
        else if (k == "compatibility_excess") p.compatibility.excess = as_double(k, v, e.line);
        else if (k == "compatibility_disjoint") p.compatibility.disjoint = as_double(k, v, e.line);
        else if (k == "compatibility_weight") p.compatibility.weight = as_double(k, v, e.line);
        else if (k == "survival_fraction") p.survival_fraction = probability(k, v, e.line);
        else if (k == "species_max_stagnation") p.species_max_stagnation = count(k, v, e.line, 1);
        else if (k == "reinjection_period") p.reinjection_period = count(k, v, e.line, 0);
        else if (k == "reinjection_count") p.reinjection_count = count(k, v, e.line, 0);
        else if (k == "reset_on_extinction") p.reset_on_extinction = as_bool(k, v, e.line);
        else if (k == "schedule") p.mutation_schedule.push_back(parse_schedule(v, p.mutation, e.line));
        else if (k == "episodes_per_genome") tc.episodes_per_genome = count(k, v, e.line, 1);
        else if (k == "seed_mode") {
            const auto m = parse_seed_mode(v);
            if (!m) bad_value(k, v, e.line, "per_genome, shared or fixed");
            tc.seed_mode = *m;
        } else if (k == "checkpoint_every") tc.checkpoint_every = count(k, v, e.line, 0);
        else throw FormatError("unknown key '" + k + "'", e.line);
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("invalid parameters: ") + e.what(), 0);
    }
    return tc;
}

namespace {

void mutation_text(std::ostream& os, const MutationParams& m, const char* sep, const char* end) {
    os << "conn_add_prob" << sep << format_double(m.conn_add_prob) << end
       << "conn_delete_prob" << sep << format_double(m.conn_delete_prob) << end
       << "node_add_prob" << sep << format_double(m.node_add_prob) << end
       << "node_delete_prob" << sep << format_double(m.node_delete_prob) << end
       << "weight_mutate_rate" << sep << format_double(m.weight_mutate_rate) << end
       << "weight_mutate_power" << sep << format_double(m.weight_mutate_power) << end
       << "weight_replace_rate" << sep << format_double(m.weight_replace_rate) << end
       << "weight_init_min" << sep << format_double(m.init_range.lo) << end
       << "weight_init_max" << sep << format_double(m.init_range.hi) << end
       << "weight_min" << sep << format_double(m.weight_min) << end
       << "weight_max" << sep << format_double(m.weight_max) << end
       << "reenable_prob" << sep << format_double(m.reenable_prob) << end
       << "activation_mutate_rate" << sep << format_double(m.activation_mutate_rate);
}

}  // namespace

std::string to_text(const TrainingConfig& tc) {
    const EvolveParams& p = tc.evolve;
    std::ostringstream os;
    os << "pop_size = " << p.pop_size << '\n'
       << "elitism = " << p.elitism << '\n'
       << "fitness_threshold = " << format_double(p.fitness_threshold) << '\n'
       << "stop_at_threshold = " << (p.stop_at_threshold ? "true" : "false") << '\n'
       << "compatibility_threshold = " << format_double(p.compatibility_threshold) << '\n'
       << "compatibility_excess = " << format_double(p.compatibility.excess) << '\n'
       << "compatibility_disjoint = " << format_double(p.compatibility.disjoint) << '\n'
       << "compatibility_weight = " << format_double(p.compatibility.weight) << '\n'
       << "survival_fraction = " << format_double(p.survival_fraction) << '\n'
       << "species_max_stagnation = " << p.species_max_stagnation << '\n'
       << "reinjection_period = " << p.reinjection_period << '\n'
       << "reinjection_count = " << p.reinjection_count << '\n'
       << "reset_on_extinction = " << (p.reset_on_extinction ? "true" : "false") << '\n';
    mutation_text(os, p.mutation, " = ", "\n");
    os << '\n';
    for (const auto& e : p.mutation_schedule) {
        os << "schedule = " << e.first << '-' << e.last << ':';
        mutation_text(os, e.params, "=", ",");
        os << '\n';
    }
    os << "episodes_per_genome = " << tc.episodes_per_genome << '\n'
       << "seed_mode = " << to_string(tc.seed_mode) << '\n'
       << "checkpoint_every = " << tc.checkpoint_every << '\n';
    return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    try {
        return parse_scenario_config(read_text_file(path));
    } catch (const FormatError& e) {
        throw FormatError::with_context(path.string(), e);
    }
}

TrainingConfig load_training_config(const std::filesystem::path& path) {
    try {
        return parse_training_config(read_text_file(path));
    } catch (const FormatError& e) {
        throw FormatError::with_context(path.string(), e);
    }
}

}  // namespace neatnav
