#include "neatnav/genome.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "neatnav/errors.hpp"

namespace neatnav {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::input: return "input";
        case NodeKind::bias: return "bias";
        case NodeKind::hidden: return "hidden";
        case NodeKind::output: return "output";
    }
    return "?";
}

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::linear: return "linear";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view s) {
    if (s == "input") return NodeKind::input;
    if (s == "bias") return NodeKind::bias;
    if (s == "hidden") return NodeKind::hidden;
    if (s == "output") return NodeKind::output;
    return std::nullopt;
}

std::optional<Activation> parse_activation(std::string_view s) {
    if (s == "linear") return Activation::linear;
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    return std::nullopt;
}

double apply_activation(Activation act, double x) {
    switch (act) {
        case Activation::linear: return x;
        case Activation::tanh: return std::tanh(x);
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

void MutationParams::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
    };
    prob(conn_add_prob, "conn_add_prob");
    prob(conn_delete_prob, "conn_delete_prob");
    prob(node_add_prob, "node_add_prob");
    prob(node_delete_prob, "node_delete_prob");
    prob(weight_mutate_rate, "weight_mutate_rate");
    prob(weight_replace_rate, "weight_replace_rate");
    prob(reenable_prob, "reenable_prob");
    prob(activation_mutate_rate, "activation_mutate_rate");
    if (weight_mutate_rate + weight_replace_rate > 1.0)
        throw std::invalid_argument("weight_mutate_rate + weight_replace_rate exceeds 1");
    if (!(weight_mutate_power >= 0.0)) throw std::invalid_argument("weight_mutate_power < 0");
    if (!(init_range.lo <= init_range.hi)) throw std::invalid_argument("empty init weight range");
    if (!(weight_min <= weight_max)) throw std::invalid_argument("empty weight clamp range");
}

// ---------------------------------------------------------------------------
// Genome accessors

const NodeGene* Genome::find_node(int id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const NodeGene& n, int v) { return n.id < v; });
    return (it != nodes.end() && it->id == id) ? &*it : nullptr;
}

const ConnectionGene* Genome::find_connection(int from, int to) const {
    for (const auto& c : connections)
        if (c.from == from && c.to == to) return &c;
    return nullptr;
}

std::size_t Genome::hidden_count() const {
    return static_cast<std::size_t>(std::count_if(
        nodes.begin(), nodes.end(), [](const NodeGene& n) { return n.kind == NodeKind::hidden; }));
}

std::size_t Genome::enabled_count() const {
    return static_cast<std::size_t>(std::count_if(
        connections.begin(), connections.end(), [](const ConnectionGene& c) { return c.enabled; }));
}

bool Genome::same_genes(const Genome& other) const {
    return n_inputs == other.n_inputs && n_outputs == other.n_outputs && nodes == other.nodes &&
           connections == other.connections;
}

bool Genome::same_topology(const Genome& other) const {
    if (n_inputs != other.n_inputs || n_outputs != other.n_outputs || nodes != other.nodes ||
        connections.size() != other.connections.size())
        return false;
    for (std::size_t i = 0; i < connections.size(); ++i) {
        const auto& a = connections[i];
        const auto& b = other.connections[i];
        if (a.innovation != b.innovation || a.from != b.from || a.to != b.to ||
            a.enabled != b.enabled)
            return false;
    }
    return true;
}

MutationLog& MutationLog::operator+=(const MutationLog& o) {
    calls += o.calls;
    add_node_attempts += o.add_node_attempts;
    delete_node_attempts += o.delete_node_attempts;
    add_connection_attempts += o.add_connection_attempts;
    delete_connection_attempts += o.delete_connection_attempts;
    return *this;
}

// ---------------------------------------------------------------------------
// Registry

int InnovationRegistry::connection(int from, int to) {
    auto [it, inserted] = pair_map_.try_emplace(key(from, to), next_innovation_);
    if (inserted) ++next_innovation_;
    return it->second;
}

std::optional<int> InnovationRegistry::find(int from, int to) const {
    auto it = pair_map_.find(key(from, to));
    if (it == pair_map_.end()) return std::nullopt;
    return it->second;
}

int InnovationRegistry::split_node(int innovation, const Genome& genome) {
    auto it = split_map_.find(innovation);
    if (it != split_map_.end() && genome.find_node(it->second) == nullptr) return it->second;
    const int id = fresh_node();
    if (it == split_map_.end()) split_map_.emplace(innovation, id);
    return id;
}

int InnovationRegistry::fresh_node() { return next_node_id_++; }

void InnovationRegistry::reserve_nodes(int first_free_id) {
    next_node_id_ = std::max(next_node_id_, first_free_id);
}

void InnovationRegistry::absorb(const Genome& genome) {
    for (const auto& c : genome.connections) {
        pair_map_.try_emplace(key(c.from, c.to), c.innovation);
        next_innovation_ = std::max(next_innovation_, c.innovation + 1);
    }
    for (const auto& n : genome.nodes) next_node_id_ = std::max(next_node_id_, n.id + 1);
}

// ---------------------------------------------------------------------------
// Graph helpers over dense node indices.

namespace {

struct DenseGraph {
    std::vector<int> ids;                 // dense index -> node id (sorted)
    std::vector<std::vector<int>> out;    // enabled adjacency

    int index_of(int id) const {
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        return (it != ids.end() && *it == id) ? static_cast<int>(it - ids.begin()) : -1;
    }
};

DenseGraph build_graph(const Genome& g) {
    DenseGraph dg;
    dg.ids.reserve(g.nodes.size());
    for (const auto& n : g.nodes) dg.ids.push_back(n.id);
    dg.out.assign(dg.ids.size(), {});
    for (const auto& c : g.connections) {
        if (!c.enabled) continue;
        const int a = dg.index_of(c.from);
        const int b = dg.index_of(c.to);
        if (a >= 0 && b >= 0) dg.out[a].push_back(b);
    }
    return dg;
}

// Is `target` reachable from `start` along enabled edges?
bool reaches(const DenseGraph& dg, int start, int target) {
    if (start == target) return true;
    std::vector<char> seen(dg.ids.size(), 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : dg.out[u]) {
            if (v == target) return true;
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return false;
}

bool acyclic(const DenseGraph& dg) {
    std::vector<int> indeg(dg.ids.size(), 0);
    for (const auto& adj : dg.out)
        for (int v : adj) ++indeg[v];
    std::vector<int> ready;
    for (std::size_t i = 0; i < indeg.size(); ++i)
        if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
    std::size_t visited = 0;
    while (!ready.empty()) {
        const int u = ready.back();
        ready.pop_back();
        ++visited;
        for (int v : dg.out[u])
            if (--indeg[v] == 0) ready.push_back(v);
    }
    return visited == dg.ids.size();
}

void insert_node_sorted(Genome& g, NodeGene n) {
    auto it = std::lower_bound(g.nodes.begin(), g.nodes.end(), n.id,
                               [](const NodeGene& a, int v) { return a.id < v; });
    g.nodes.insert(it, n);
}

void insert_connection_sorted(Genome& g, ConnectionGene c) {
    auto it = std::lower_bound(g.connections.begin(), g.connections.end(), c.innovation,
                               [](const ConnectionGene& a, int v) { return a.innovation < v; });
    g.connections.insert(it, c);
}

constexpr Activation kHiddenActivations[] = {Activation::tanh, Activation::relu,
                                             Activation::sigmoid};

}  // namespace

std::optional<std::vector<int>> topological_order(const Genome& genome) {
    const DenseGraph dg = build_graph(genome);
    std::vector<int> indeg(dg.ids.size(), 0);
    for (const auto& adj : dg.out)
        for (int v : adj) ++indeg[v];
    // Min-heap on dense index keeps the order deterministic (ascending node id).
    std::set<int> ready;
    for (std::size_t i = 0; i < indeg.size(); ++i)
        if (indeg[i] == 0) ready.insert(static_cast<int>(i));
    std::vector<int> order;
    order.reserve(dg.ids.size());
    while (!ready.empty()) {
        const int u = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(dg.ids[u]);
        for (int v : dg.out[u])
            if (--indeg[v] == 0) ready.insert(v);
    }
    if (order.size() != dg.ids.size()) return std::nullopt;
    return order;
}

// ---------------------------------------------------------------------------
// Construction

Genome new_minimal_genome(int n_inputs, int n_outputs, InnovationRegistry& registry, Random& rng,
                          WeightRange range) {
    if (n_inputs < 1 || n_outputs < 1)
        throw DimensionError("genome needs at least one input and one output (got " +
                             std::to_string(n_inputs) + " inputs, " + std::to_string(n_outputs) +
                             " outputs)");
    Genome g;
    g.n_inputs = n_inputs;
    g.n_outputs = n_outputs;
    g.nodes.reserve(static_cast<std::size_t>(n_inputs + 1 + n_outputs));
    for (int i = 0; i < n_inputs; ++i) g.nodes.push_back({i, NodeKind::input, Activation::linear});
    g.nodes.push_back({n_inputs, NodeKind::bias, Activation::linear});
    for (int k = 0; k < n_outputs; ++k)
        g.nodes.push_back({g.output_id(k), NodeKind::output, Activation::linear});
    registry.reserve_nodes(n_inputs + 1 + n_outputs);

    g.connections.reserve(static_cast<std::size_t>((n_inputs + 1) * n_outputs));
    for (int k = 0; k < n_outputs; ++k) {
        for (int i = 0; i <= n_inputs; ++i) {
            const int to = g.output_id(k);
            g.connections.push_back(
                {registry.connection(i, to), i, to, rng.uniform(range.lo, range.hi), true});
        }
    }
    std::sort(g.connections.begin(), g.connections.end(),
              [](const ConnectionGene& a, const ConnectionGene& b) {
                  return a.innovation < b.innovation;
              });
    return g;
}

// ---------------------------------------------------------------------------
// Mutation

bool mutate_add_node(Genome& g, InnovationRegistry& registry, Random& rng) {
    std::vector<std::size_t> enabled;
    for (std::size_t i = 0; i < g.connections.size(); ++i)
        if (g.connections[i].enabled) enabled.push_back(i);
    if (enabled.empty()) return false;
    const ConnectionGene old = g.connections[enabled[rng.index(enabled.size())]];
    const int node = registry.split_node(old.innovation, g);
    for (auto& c : g.connections)
        if (c.innovation == old.innovation) c.enabled = false;
    insert_node_sorted(g, {node, NodeKind::hidden, Activation::tanh});
    insert_connection_sorted(g, {registry.connection(old.from, node), old.from, node, 1.0, true});
    insert_connection_sorted(g, {registry.connection(node, old.to), node, old.to, old.weight, true});
    return true;
}

bool mutate_add_connection(Genome& g, InnovationRegistry& registry, Random& rng,
                           WeightRange range) {
    const DenseGraph dg = build_graph(g);
    const std::size_t n = dg.ids.size();

    // Existing (from,to) pairs in either enabled state count as duplicates.
    std::vector<std::vector<int>> sources(n);
    for (const auto& c : g.connections) {
        const int a = dg.index_of(c.from);
        const int b = dg.index_of(c.to);
        if (a >= 0 && b >= 0) sources[b].push_back(a);
    }

    std::vector<int> targets;
    for (std::size_t i = 0; i < n; ++i) {
        const NodeKind k = g.nodes[i].kind;
        if (k == NodeKind::hidden || k == NodeKind::output) targets.push_back(static_cast<int>(i));
    }

    // For each target, mark forbidden sources: outputs, itself, its descendants,
    // and existing sources. Count the legal remainder.
    std::vector<std::vector<char>> forbidden(targets.size());
    std::vector<std::size_t> counts(targets.size(), 0);
    std::size_t total = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        auto& f = forbidden[t];
        f.assign(n, 0);
        const int tgt = targets[t];
        std::vector<int> stack{tgt};
        f[tgt] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : dg.out[u])
                if (!f[v]) {
                    f[v] = 1;
                    stack.push_back(v);
                }
        }
        for (int s : sources[tgt]) f[s] = 1;
        std::size_t legal = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (!f[i] && g.nodes[i].kind != NodeKind::output) ++legal;
        counts[t] = legal;
        total += legal;
    }
    if (total == 0) return false;

    std::size_t pick = rng.index(total);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (pick >= counts[t]) {
            pick -= counts[t];
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (forbidden[t][i] || g.nodes[i].kind == NodeKind::output) continue;
            if (pick-- == 0) {
                const int from = dg.ids[i];
                const int to = dg.ids[targets[t]];
                insert_connection_sorted(g, {registry.connection(from, to), from, to,
                                             rng.uniform(range.lo, range.hi), true});
                return true;
            }
        }
    }
    return false;
}

bool mutate_delete_node(Genome& g, Random& rng) {
    std::vector<int> hidden;
    for (const auto& n : g.nodes)
        if (n.kind == NodeKind::hidden) hidden.push_back(n.id);
    if (hidden.empty()) return false;
    const int victim = hidden[rng.index(hidden.size())];
    std::erase_if(g.nodes, [victim](const NodeGene& n) { return n.id == victim; });
    std::erase_if(g.connections,
                  [victim](const ConnectionGene& c) { return c.from == victim || c.to == victim; });
    return true;
}

bool mutate_delete_connection(Genome& g, Random& rng) {
    if (g.connections.empty()) return false;
    g.connections.erase(g.connections.begin() +
                        static_cast<std::ptrdiff_t>(rng.index(g.connections.size())));
    return true;
}

void mutate_weights(Genome& g, const MutationParams& p, Random& rng) {
    for (auto& c : g.connections) {
        const double r = rng.uniform();
        if (r < p.weight_mutate_rate) {
            c.weight += rng.gaussian(0.0, p.weight_mutate_power);
        } else if (r < p.weight_mutate_rate + p.weight_replace_rate) {
            c.weight = rng.uniform(p.init_range.lo, p.init_range.hi);
        }
        c.weight = std::clamp(c.weight, p.weight_min, p.weight_max);
    }
}

namespace {

void maybe_reenable(Genome& g, const MutationParams& p, Random& rng) {
    if (!(p.reenable_prob > 0.0) || !rng.chance(p.reenable_prob)) return;
    std::vector<std::size_t> disabled;
    for (std::size_t i = 0; i < g.connections.size(); ++i)
        if (!g.connections[i].enabled) disabled.push_back(i);
    if (disabled.empty()) return;
    auto& c = g.connections[disabled[rng.index(disabled.size())]];
    const DenseGraph dg = build_graph(g);
    const int a = dg.index_of(c.from);
    const int b = dg.index_of(c.to);
    if (a < 0 || b < 0 || reaches(dg, b, a)) return;
    c.enabled = true;
}

void mutate_activations(Genome& g, const MutationParams& p, Random& rng) {
    if (!(p.activation_mutate_rate > 0.0)) return;
    for (auto& n : g.nodes) {
        if (n.kind != NodeKind::hidden) continue;
        if (rng.chance(p.activation_mutate_rate)) n.activation = kHiddenActivations[rng.index(3)];
    }
}

}  // namespace

Genome mutate(const Genome& genome, const MutationParams& p, InnovationRegistry& registry,
              Random& rng, MutationLog* log) {
    Genome g = genome;
    g.fitness.reset();
    MutationLog local;
    ++local.calls;
    // One draw per structural operator, always, so the stream does not depend
    // on which operators fire.
    const double r_add_node = rng.uniform();
    const double r_del_node = rng.uniform();
    const double r_add_conn = rng.uniform();
    const double r_del_conn = rng.uniform();
    if (r_add_node < p.node_add_prob) {
        ++local.add_node_attempts;
        mutate_add_node(g, registry, rng);
    }
    if (r_del_node < p.node_delete_prob) {
        ++local.delete_node_attempts;
        mutate_delete_node(g, rng);
    }
    if (r_add_conn < p.conn_add_prob) {
        ++local.add_connection_attempts;
        mutate_add_connection(g, registry, rng, p.init_range);
    }
    if (r_del_conn < p.conn_delete_prob) {
        ++local.delete_connection_attempts;
        mutate_delete_connection(g, rng);
    }
    maybe_reenable(g, p, rng);
    mutate_activations(g, p, rng);
    if (p.weight_mutate_rate > 0.0 || p.weight_replace_rate > 0.0) mutate_weights(g, p, rng);
    if (log) *log += local;
    return g;
}

// ---------------------------------------------------------------------------
// Crossover

Genome crossover(const Genome& a, const Genome& b, double fitness_a, double fitness_b,
                 Random& rng) {
    if (a.n_inputs != b.n_inputs || a.n_outputs != b.n_outputs)
        throw DimensionError("crossover parents differ in dimensions: " +
                             std::to_string(a.n_inputs) + "x" + std::to_string(a.n_outputs) +
                             " vs " + std::to_string(b.n_inputs) + "x" +
                             std::to_string(b.n_outputs));
    bool a_fitter;
    if (fitness_a > fitness_b) a_fitter = true;
    else if (fitness_b > fitness_a) a_fitter = false;
    else a_fitter = rng.chance(0.5);
    const Genome& fit = a_fitter ? a : b;
    const Genome& other = a_fitter ? b : a;

    Genome child;
    child.n_inputs = fit.n_inputs;
    child.n_outputs = fit.n_outputs;
    child.nodes = fit.nodes;
    for (auto& n : child.nodes) {
        if (n.kind != NodeKind::hidden) continue;
        if (const NodeGene* o = other.find_node(n.id); o && rng.chance(0.5))
            n.activation = o->activation;
    }

    child.connections.reserve(fit.connections.size());
    std::size_t j = 0;
    for (const auto& gene : fit.connections) {
        while (j < other.connections.size() && other.connections[j].innovation < gene.innovation)
            ++j;
        if (j < other.connections.size() && other.connections[j].innovation == gene.innovation) {
            const auto& og = other.connections[j];
            ConnectionGene c = rng.chance(0.5) ? gene : og;
            if (!gene.enabled || !og.enabled) c.enabled = !rng.chance(kInheritDisabledProb);
            child.connections.push_back(c);
        } else {
            child.connections.push_back(gene);
        }
    }

    if (!acyclic(build_graph(child))) {
        // Re-enable genes one at a time in innovation order; drop any that close a cycle.
        std::vector<char> want(child.connections.size());
        for (std::size_t i = 0; i < child.connections.size(); ++i) {
            want[i] = child.connections[i].enabled;
            child.connections[i].enabled = false;
        }
        for (std::size_t i = 0; i < child.connections.size(); ++i) {
            if (!want[i]) continue;
            const DenseGraph dg = build_graph(child);
            const int s = dg.index_of(child.connections[i].from);
            const int t = dg.index_of(child.connections[i].to);
            if (!reaches(dg, t, s)) child.connections[i].enabled = true;
        }
    }
    return child;
}

// ---------------------------------------------------------------------------
// Distance

double compatibility_distance(const Genome& a, const Genome& b,
                              const CompatibilityCoefficients& k) {
    const auto& ca = a.connections;
    const auto& cb = b.connections;
    const int max_a = ca.empty() ? 0 : ca.back().innovation;
    const int max_b = cb.empty() ? 0 : cb.back().innovation;
    const int excess_from = std::min(max_a, max_b);

    std::size_t i = 0, j = 0;
    double excess = 0, disjoint = 0, weight_diff = 0;
    std::size_t matching = 0;
    while (i < ca.size() || j < cb.size()) {
        if (j == cb.size() || (i < ca.size() && ca[i].innovation < cb[j].innovation)) {
            (ca[i].innovation > excess_from ? excess : disjoint) += 1;
            ++i;
        } else if (i == ca.size() || cb[j].innovation < ca[i].innovation) {
            (cb[j].innovation > excess_from ? excess : disjoint) += 1;
            ++j;
        } else {
            weight_diff += std::abs(ca[i].weight - cb[j].weight);
            ++matching;
            ++i;
            ++j;
        }
    }
    double n = static_cast<double>(std::max(ca.size(), cb.size()));
    if (ca.size() < 20 && cb.size() < 20) n = 1.0;
    if (n < 1.0) n = 1.0;
    const double mean_w = matching ? weight_diff / static_cast<double>(matching) : 0.0;
    return k.excess * excess / n + k.disjoint * disjoint / n + k.weight * mean_w;
}

// ---------------------------------------------------------------------------
// Validation

void validate(const Genome& g) {
    if (g.n_inputs < 1 || g.n_outputs < 1) throw InvalidGenome("non-positive dimensions");
    const std::size_t fixed = static_cast<std::size_t>(g.n_inputs + 1 + g.n_outputs);
    if (g.nodes.size() < fixed) throw InvalidGenome("missing input/bias/output nodes");
    for (std::size_t i = 0; i < fixed; ++i) {
        const auto& n = g.nodes[i];
        const int id = static_cast<int>(i);
        NodeKind want = id < g.n_inputs ? NodeKind::input
                        : id == g.n_inputs ? NodeKind::bias
                                           : NodeKind::output;
        if (n.id != id || n.kind != want)
            throw InvalidGenome("node " + std::to_string(id) + " should be " +
                                std::string(to_string(want)));
        if (n.activation != Activation::linear)
            throw InvalidGenome("node " + std::to_string(id) + " must be linear");
    }
    for (std::size_t i = fixed; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        if (n.kind != NodeKind::hidden)
            throw InvalidGenome("extra non-hidden node " + std::to_string(n.id));
        if (n.activation == Activation::linear)
            throw InvalidGenome("hidden node " + std::to_string(n.id) + " is linear");
        if (n.id <= g.nodes[i - 1].id) throw InvalidGenome("node ids not strictly increasing");
    }
    std::set<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < g.connections.size(); ++i) {
        const auto& c = g.connections[i];
        if (i > 0 && c.innovation <= g.connections[i - 1].innovation)
            throw InvalidGenome("innovations not strictly increasing at " +
                                std::to_string(c.innovation));
        const NodeGene* from = g.find_node(c.from);
        const NodeGene* to = g.find_node(c.to);
        if (!from || !to)
            throw InvalidGenome("connection " + std::to_string(c.innovation) +
                                " references a missing node");
        if (from->kind == NodeKind::output)
            throw InvalidGenome("connection " + std::to_string(c.innovation) + " leaves an output");
        if (to->kind == NodeKind::input || to->kind == NodeKind::bias)
            throw InvalidGenome("connection " + std::to_string(c.innovation) +
                                " enters an input/bias");
        if (!pairs.insert({c.from, c.to}).second)
            throw InvalidGenome("duplicate connection " + std::to_string(c.from) + "->" +
                                std::to_string(c.to));
        if (!std::isfinite(c.weight))
            throw InvalidGenome("non-finite weight on " + std::to_string(c.innovation));
    }
    if (!acyclic(build_graph(g))) throw InvalidGenome("enabled graph has a cycle");
}

bool is_valid(const Genome& g) {
    try {
        validate(g);
        return true;
    } catch (const InvalidGenome&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// Text format

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string to_text(const Genome& g) {
    std::string out;
    out.reserve(64 + g.nodes.size() * 24 + g.connections.size() * 48);
    out += "genome " + std::to_string(g.n_inputs) + " " + std::to_string(g.n_outputs) + "\n";
    for (const auto& n : g.nodes) {
        out += "node ";
        out += std::to_string(n.id);
        out += ' ';
        out += to_string(n.kind);
        out += ' ';
        out += to_string(n.activation);
        out += '\n';
    }
    for (const auto& c : g.connections) {
        out += "conn ";
        out += std::to_string(c.innovation);
        out += ' ';
        out += std::to_string(c.from);
        out += ' ';
        out += std::to_string(c.to);
        out += ' ';
        out += format_double(c.weight);
        out += c.enabled ? " 1\n" : " 0\n";
    }
    return out;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <class T>
T parse_num(std::string_view s, int line, const char* what) {
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw FormatError(std::string("bad ") + what + " '" + std::string(s) + "'", line);
    return v;
}

}  // namespace

Genome genome_from_text(std::string_view text, std::size_t& pos, int& line_no) {
    Genome g;
    bool have_header = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string_view line = text.substr(pos, eol - pos);
        const auto tok = split_ws(line);
        if (tok.empty() || tok[0].front() == '#') {
            pos = eol + 1;
            ++line_no;
            continue;
        }
        if (tok[0] == "genome") {
            if (have_header) break;  // start of the next genome
            ++line_no;
            if (tok.size() != 3) throw FormatError("genome header needs 2 fields", line_no);
            g.n_inputs = parse_num<int>(tok[1], line_no, "input count");
            g.n_outputs = parse_num<int>(tok[2], line_no, "output count");
            have_header = true;
        } else if (!have_header) {
            throw FormatError("expected 'genome' header", line_no + 1);
        } else if (tok[0] == "node") {
            ++line_no;
            if (tok.size() != 4) throw FormatError("node line needs 3 fields", line_no);
            NodeGene n;
            n.id = parse_num<int>(tok[1], line_no, "node id");
            auto kind = parse_node_kind(tok[2]);
            auto act = parse_activation(tok[3]);
            if (!kind) throw FormatError("unknown node kind '" + std::string(tok[2]) + "'", line_no);
            if (!act) throw FormatError("unknown activation '" + std::string(tok[3]) + "'", line_no);
            n.kind = *kind;
            n.activation = *act;
            g.nodes.push_back(n);
        } else if (tok[0] == "conn") {
            ++line_no;
            if (tok.size() != 6) throw FormatError("conn line needs 5 fields", line_no);
            ConnectionGene c;
            c.innovation = parse_num<int>(tok[1], line_no, "innovation");
            c.from = parse_num<int>(tok[2], line_no, "source id");
            c.to = parse_num<int>(tok[3], line_no, "target id");
            c.weight = parse_num<double>(tok[4], line_no, "weight");
            if (tok[5] == "1") c.enabled = true;
            else if (tok[5] == "0") c.enabled = false;
            else throw FormatError("enabled flag must be 0 or 1", line_no);
            g.connections.push_back(c);
        } else {
            throw FormatError("unknown record '" + std::string(tok[0]) + "'", line_no + 1);
        }
        pos = eol + 1;
    }
    if (!have_header) throw FormatError("no genome found", line_no);
    try {
        validate(g);
    } catch (const InvalidGenome& e) {
        throw FormatError(std::string("invalid genome: ") + e.what(), line_no);
    }
    return g;
}

Genome genome_from_text(std::string_view text) {
    std::size_t pos = 0;
    int line = 0;
    Genome g = genome_from_text(text, pos, line);
    // Anything after the first genome must be blank or comments.
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const auto tok = split_ws(text.substr(pos, eol - pos));
        ++line;
        if (!tok.empty() && tok[0].front() != '#')
            throw FormatError("trailing content after genome", line);
        pos = eol + 1;
    }
    return g;
}

void save_genome(const Genome& genome, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_text(genome);
    if (!out) throw Error("write failed for " + path.string());
}

Genome load_genome(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return genome_from_text(ss.str());
    } catch (const FormatError& e) {
        throw FormatError::with_context(path.string(), e);
    }
}

}  // namespace neatnav
