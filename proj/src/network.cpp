#include "neatnav/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "neatnav/errors.hpp"

namespace neatnav {

ActionCommand scale_action(std::span<const double> raw, bool allow_reverse) {
    if (raw.size() < 2)
        throw DimensionError("action needs 2 raw outputs, got " + std::to_string(raw.size()));
    auto finite_or_zero = [](double x) { return std::isfinite(x) ? x : 0.0; };
    const double lo = allow_reverse ? -kMaxSpeed : 0.0;
    ActionCommand cmd;
    cmd.v = std::clamp(finite_or_zero(raw[0]), lo, kMaxSpeed);
    cmd.omega = std::clamp(finite_or_zero(raw[1]), -1.0, 1.0) * kMaxTurnRate;
    return cmd;
}

std::span<const Network::Edge> Network::incoming(std::size_t plan_index) const {
    const Node& n = plan_.at(plan_index);
    return {edges_.data() + n.first_edge, n.edge_count};
}

bool Network::same_shape(const Network& o) const {
    if (n_inputs_ != o.n_inputs_ || n_outputs_ != o.n_outputs_ || plan_.size() != o.plan_.size() ||
        edges_.size() != o.edges_.size() || outputs_ != o.outputs_)
        return false;
    for (std::size_t i = 0; i < plan_.size(); ++i) {
        if (plan_[i].activation != o.plan_[i].activation ||
            plan_[i].edge_count != o.plan_[i].edge_count ||
            plan_[i].first_edge != o.plan_[i].first_edge)
            return false;
    }
    for (std::size_t e = 0; e < edges_.size(); ++e)
        if (edges_[e].source != o.edges_[e].source) return false;
    return true;
}

void Network::activate(std::span<const double> obs, std::span<double> slots,
                       std::span<double> out) const {
    if (obs.size() != static_cast<std::size_t>(n_inputs_))
        throw DimensionError("observation has " + std::to_string(obs.size()) +
                             " values, network expects " + std::to_string(n_inputs_));
    std::copy(obs.begin(), obs.end(), slots.begin());
    slots[static_cast<std::size_t>(n_inputs_)] = 1.0;
    const std::size_t base = static_cast<std::size_t>(n_inputs_) + 1;
    for (std::size_t i = 0; i < plan_.size(); ++i) {
        const Node& n = plan_[i];
        const Edge* e = edges_.data() + n.first_edge;
        double sum = 0.0;
        for (std::uint32_t k = 0; k < n.edge_count; ++k) sum += slots[e[k].source] * e[k].weight;
        slots[base + i] = apply_activation(n.activation, sum);
    }
    for (std::size_t k = 0; k < outputs_.size(); ++k)
        out[k] = slots[base + static_cast<std::size_t>(outputs_[k])];
}

std::vector<double> Network::activate(std::span<const double> obs) const {
    std::vector<double> slots(slot_count());
    std::vector<double> out(static_cast<std::size_t>(n_outputs_));
    activate(obs, slots, out);
    return out;
}

Network decode(const Genome& g) {
    if (!topological_order(g)) throw DecodeError("genome has a cycle among enabled connections");
    const auto order = *topological_order(g);

    std::map<int, std::vector<int>> fwd, back;  // node id -> neighbours (enabled)
    for (const auto& c : g.connections) {
        if (!c.enabled) continue;
        fwd[c.from].push_back(c.to);
        back[c.to].push_back(c.from);
    }
    auto flood = [](const std::map<int, std::vector<int>>& adj, std::vector<int> seeds) {
        std::map<int, char> seen;
        for (int s : seeds) seen[s] = 1;
        while (!seeds.empty()) {
            const int u = seeds.back();
            seeds.pop_back();
            auto it = adj.find(u);
            if (it == adj.end()) continue;
            for (int v : it->second)
                if (!seen.count(v)) {
                    seen[v] = 1;
                    seeds.push_back(v);
                }
        }
        return seen;
    };
    std::vector<int> sources, sinks;
    for (int i = 0; i <= g.n_inputs; ++i) sources.push_back(i);
    for (int k = 0; k < g.n_outputs; ++k) sinks.push_back(g.output_id(k));
    const auto from_inputs = flood(fwd, sources);
    const auto to_outputs = flood(back, sinks);

    Network net;
    net.n_inputs_ = g.n_inputs;
    net.n_outputs_ = g.n_outputs;

    // Slot index for every value-producing node kept in the plan.
    std::map<int, int> slot;
    for (int i = 0; i <= g.n_inputs; ++i) slot[i] = i;
    std::vector<int> computed;
    for (int id : order) {
        const NodeGene* n = g.find_node(id);
        if (n->kind == NodeKind::output ||
            (n->kind == NodeKind::hidden && from_inputs.count(id) && to_outputs.count(id)))
            computed.push_back(id);
    }
    const int base = g.n_inputs + 1;
    for (std::size_t i = 0; i < computed.size(); ++i) slot[computed[i]] = base + static_cast<int>(i);

    std::vector<char> input_used(static_cast<std::size_t>(g.n_inputs), 0);
    for (int id : computed) {
        Network::Node node;
        node.node_id = id;
        node.activation = g.find_node(id)->activation;
        node.first_edge = static_cast<std::uint32_t>(net.edges_.size());
        for (const auto& c : g.connections) {
            if (!c.enabled || c.to != id) continue;
            auto s = slot.find(c.from);
            if (s == slot.end()) continue;  // pruned source
            net.edges_.push_back({s->second, c.weight});
            if (c.from < g.n_inputs) input_used[static_cast<std::size_t>(c.from)] = 1;
        }
        node.edge_count = static_cast<std::uint32_t>(net.edges_.size()) - node.first_edge;
        net.plan_.push_back(node);
    }
    for (int k = 0; k < g.n_outputs; ++k)
        net.outputs_.push_back(slot.at(g.output_id(k)) - base);
    for (int i = 0; i < g.n_inputs; ++i)
        if (input_used[static_cast<std::size_t>(i)]) net.used_inputs_.push_back(i);
    return net;
}

std::vector<std::vector<double>> activate_batch(std::span<const Network> nets,
                                                std::span<const std::vector<double>> obs) {
    if (nets.size() != obs.size())
        throw DimensionError("batch has " + std::to_string(nets.size()) + " networks but " +
                             std::to_string(obs.size()) + " observations");
    for (std::size_t i = 0; i < nets.size(); ++i)
        if (obs[i].size() != static_cast<std::size_t>(nets[i].n_inputs()))
            throw DimensionError("batch element " + std::to_string(i) + ": observation has " +
                                 std::to_string(obs[i].size()) + " values, network expects " +
                                 std::to_string(nets[i].n_inputs()));

    std::vector<std::vector<double>> result(nets.size());
    std::vector<char> done(nets.size(), 0);
    std::vector<std::size_t> group;
    for (std::size_t lead = 0; lead < nets.size(); ++lead) {
        if (done[lead]) continue;
        group.clear();
        for (std::size_t j = lead; j < nets.size(); ++j)
            if (!done[j] && (j == lead || nets[lead].same_shape(nets[j]))) {
                group.push_back(j);
                done[j] = 1;
            }

        // Node-major sweep over a group of identically shaped plans. Each sum
        // accumulates in the same edge order as Network::activate.
        const Network& shape = nets[lead];
        const std::size_t slots = shape.slot_count();
        const std::size_t m = group.size();
        const std::size_t base = static_cast<std::size_t>(shape.n_inputs()) + 1;
        std::vector<double> values(slots * m);
        for (std::size_t g = 0; g < m; ++g) {
            const auto& o = obs[group[g]];
            std::copy(o.begin(), o.end(), values.begin() + static_cast<std::ptrdiff_t>(g * slots));
            values[g * slots + base - 1] = 1.0;
        }
        for (std::size_t i = 0; i < shape.plan().size(); ++i) {
            const auto& node = shape.plan()[i];
            for (std::size_t g = 0; g < m; ++g) {
                const Network& net = nets[group[g]];
                const Network::Edge* e = net.edges().data() + node.first_edge;
                double* v = values.data() + g * slots;
                double sum = 0.0;
                for (std::uint32_t k = 0; k < node.edge_count; ++k) sum += v[e[k].source] * e[k].weight;
                v[base + i] = apply_activation(node.activation, sum);
            }
        }
        for (std::size_t g = 0; g < m; ++g) {
            auto& out = result[group[g]];
            out.resize(static_cast<std::size_t>(shape.n_outputs()));
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] = values[g * slots + base +
                                static_cast<std::size_t>(shape.output_plan_index()[k])];
        }
    }
    return result;
}

}  // namespace neatnav
