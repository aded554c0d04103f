#pragma once

#include <initializer_list>
#include <tuple>

#include "neatnav/genome.hpp"
#include "neatnav/random.hpp"

namespace neatnav::test {

// Genome with `n_in` inputs, a bias, `n_out` outputs and optional hidden nodes;
// connections are (innovation, from, to, weight, enabled).
inline Genome make_genome(int n_in, int n_out, std::initializer_list<int> hidden,
                          std::initializer_list<std::tuple<int, int, int, double, bool>> conns) {
    Genome g;
    g.n_inputs = n_in;
    g.n_outputs = n_out;
    for (int i = 0; i < n_in; ++i) g.nodes.push_back({i, NodeKind::input, Activation::linear});
    g.nodes.push_back({n_in, NodeKind::bias, Activation::linear});
    for (int k = 0; k < n_out; ++k) g.nodes.push_back({n_in + 1 + k, NodeKind::output, Activation::linear});
    for (int h : hidden) g.nodes.push_back({h, NodeKind::hidden, Activation::tanh});
    for (const auto& [inn, from, to, w, en] : conns) g.connections.push_back({inn, from, to, w, en});
    return g;
}

// Random valid genome grown from a minimal one by structural mutations.
inline Genome random_genome(int n_in, int n_out, int mutations, InnovationRegistry& registry, Random& rng) {
    Genome g = new_minimal_genome(n_in, n_out, registry, rng);
    MutationParams p;
    p.node_add_prob = 0.4;
    p.conn_add_prob = 0.6;
    p.conn_delete_prob = 0.1;
    p.node_delete_prob = 0.05;
    p.activation_mutate_rate = 0.3;
    for (int i = 0; i < mutations; ++i) g = mutate(g, p, registry, rng);
    return g;
}

}  // namespace neatnav::test
