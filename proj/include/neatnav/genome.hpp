#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "neatnav/random.hpp"

namespace neatnav {

enum class NodeKind : std::uint8_t { input, bias, hidden, output };

/// Input and bias nodes carry `linear` and are treated as pass-through.
enum class Activation : std::uint8_t { linear, tanh, relu, sigmoid };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Activation act);
std::optional<NodeKind> parse_node_kind(std::string_view s);
std::optional<Activation> parse_activation(std::string_view s);

double apply_activation(Activation act, double x);

struct NodeGene {
    int id = 0;
    NodeKind kind = NodeKind::hidden;
    Activation activation = Activation::tanh;

    friend bool operator==(const NodeGene&, const NodeGene&) = default;
};

struct ConnectionGene {
    int innovation = 0;
    int from = 0;
    int to = 0;
    double weight = 0.0;
    bool enabled = true;

    friend bool operator==(const ConnectionGene&, const ConnectionGene&) = default;
};

struct WeightRange {
    double lo = -1.0;
    double hi = 1.0;

    friend bool operator==(const WeightRange&, const WeightRange&) = default;
};

struct MutationParams {
    double conn_add_prob = 0.5;
    double conn_delete_prob = 0.3;
    double node_add_prob = 0.2;
    double node_delete_prob = 0.1;
    double weight_mutate_rate = 0.8;
    double weight_mutate_power = 0.5;
    double weight_replace_rate = 0.1;
    WeightRange init_range{};
    double weight_min = -8.0;
    double weight_max = 8.0;
    // Chance per mutate call of re-enabling one disabled gene.
    double reenable_prob = 0.25;
    // Per hidden node; switches among tanh/relu/sigmoid.
    double activation_mutate_rate = 0.0;

    /// Throws std::invalid_argument if a probability leaves [0,1] or a range is empty.
    void validate() const;

    friend bool operator==(const MutationParams&, const MutationParams&) = default;
};

/// A genome is a value: node genes sorted by id, connection genes sorted by
/// innovation. Node ids: inputs [0, n_inputs), bias n_inputs, outputs follow,
/// hidden ids come from the InnovationRegistry.
struct Genome {
    int n_inputs = 0;
    int n_outputs = 0;
    std::vector<NodeGene> nodes;
    std::vector<ConnectionGene> connections;
    std::optional<double> fitness;

    int bias_id() const noexcept { return n_inputs; }
    int output_id(int k) const noexcept { return n_inputs + 1 + k; }

    const NodeGene* find_node(int id) const;
    const ConnectionGene* find_connection(int from, int to) const;
    std::size_t hidden_count() const;
    std::size_t enabled_count() const;

    /// Gene-for-gene equality, ignoring fitness.
    bool same_genes(const Genome& other) const;
    /// Equal node/connection structure and innovation ids, ignoring weights.
    bool same_topology(const Genome& other) const;
};

/// Historical markings shared by every genome of a run. Not thread-safe;
/// reproduction is single-threaded.
class InnovationRegistry {
public:
    /// Innovation id for the (from, to) pair; allocates on first sight.
    int connection(int from, int to);
    std::optional<int> find(int from, int to) const;

    /// Node id for splitting connection `innovation`. Reuses the id handed out
    /// for the same split earlier unless `genome` already holds that node.
    int split_node(int innovation, const Genome& genome);
    int fresh_node();

    /// Make ids in `genome` known so that later allocations never collide.
    void absorb(const Genome& genome);
    void reserve_nodes(int first_free_id);

    int next_innovation() const noexcept { return next_innovation_; }
    int next_node_id() const noexcept { return next_node_id_; }

private:
    static std::uint64_t key(int from, int to) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
               static_cast<std::uint32_t>(to);
    }

    std::unordered_map<std::uint64_t, int> pair_map_;
    std::unordered_map<int, int> split_map_;
    int next_innovation_ = 1;
    int next_node_id_ = 0;
};

/// Fully connected (inputs + bias) -> outputs, no hidden nodes.
Genome new_minimal_genome(int n_inputs, int n_outputs, InnovationRegistry& registry, Random& rng,
                          WeightRange range = {});

/// Counters for what mutate() attempted; used for rate checks and stats.
struct MutationLog {
    long calls = 0;
    long add_node_attempts = 0;
    long delete_node_attempts = 0;
    long add_connection_attempts = 0;
    long delete_connection_attempts = 0;

    MutationLog& operator+=(const MutationLog& o);
};

Genome mutate(const Genome& genome, const MutationParams& params, InnovationRegistry& registry,
              Random& rng, MutationLog* log = nullptr);

// Individual structural operators. Each returns false when no legal target exists.
bool mutate_add_node(Genome& genome, InnovationRegistry& registry, Random& rng);
bool mutate_add_connection(Genome& genome, InnovationRegistry& registry, Random& rng,
                           WeightRange range = {});
bool mutate_delete_node(Genome& genome, Random& rng);
bool mutate_delete_connection(Genome& genome, Random& rng);
void mutate_weights(Genome& genome, const MutationParams& params, Random& rng);

/// Probability that a gene disabled in either parent stays disabled in the child.
inline constexpr double kInheritDisabledProb = 0.75;

Genome crossover(const Genome& a, const Genome& b, double fitness_a, double fitness_b, Random& rng);

struct CompatibilityCoefficients {
    double excess = 1.0;
    double disjoint = 1.0;
    double weight = 0.4;
};

double compatibility_distance(const Genome& a, const Genome& b,
                              const CompatibilityCoefficients& coeffs = {});

/// Throws InvalidGenome naming the first violated invariant.
void validate(const Genome& genome);
bool is_valid(const Genome& genome);

/// Node ids in a topological order of the enabled graph; nullopt on a cycle.
std::optional<std::vector<int>> topological_order(const Genome& genome);

// Line-oriented text format:
//   genome <n_in> <n_out>
//   node <id> <kind> <activation>
//   conn <innovation> <from> <to> <weight> <enabled>
std::string to_text(const Genome& genome);
Genome genome_from_text(std::string_view text);
/// Parses one genome starting at `pos` (a `genome` header line); advances `pos`.
Genome genome_from_text(std::string_view text, std::size_t& pos, int& line_no);
void save_genome(const Genome& genome, const std::filesystem::path& path);
Genome load_genome(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace neatnav
