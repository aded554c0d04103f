#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>

#include "helpers.hpp"
#include "neatnav/errors.hpp"
#include "neatnav/network.hpp"

using namespace neatnav;
using neatnav::test::make_genome;
using neatnav::test::random_genome;

namespace {

// Naive recursive evaluation straight off the genome, memoized per call.
std::vector<double> oracle(const Genome& g, const std::vector<double>& x) {
    std::map<int, double> memo;
    std::function<double(int)> value = [&](int id) -> double {
        if (id < g.n_inputs) return x[static_cast<std::size_t>(id)];
        if (id == g.n_inputs) return 1.0;
        if (auto it = memo.find(id); it != memo.end()) return it->second;
        double s = 0.0;
        for (const auto& c : g.connections)
            if (c.enabled && c.to == id) s += value(c.from) * c.weight;
        const double v = apply_activation(g.find_node(id)->activation, s);
        memo[id] = v;
        return v;
    };
    std::vector<double> out;
    for (int k = 0; k < g.n_outputs; ++k) out.push_back(value(g.output_id(k)));
    return out;
}

std::vector<double> random_input(int n, Random& rng) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);
    return x;
}

}  // namespace

TEST(Decode, MinimalGenomePlan) {
    InnovationRegistry reg;
    Random rng(1);
    const Network net = decode(new_minimal_genome(2, 1, reg, rng));
    ASSERT_EQ(net.plan().size(), 1u);
    EXPECT_EQ(net.incoming(0).size(), 3u);
}

TEST(Decode, PrunesHiddenNodeWithDisabledOutput) {
    // inputs 0,1 bias 2 output 3 hidden 4; 4 -> 3 disabled.
    const Genome g = make_genome(2, 1, {4}, {{1, 0, 3, 0.5, true}, {2, 0, 4, 1.0, true}, {3, 4, 3, 2.0, false}});
    const Network net = decode(g);
    ASSERT_EQ(net.plan().size(), 1u);
    EXPECT_EQ(net.plan()[0].node_id, 3);
}

TEST(Decode, IsolatedInputIsLegal) {
    const Genome g = make_genome(3, 1, {}, {{1, 0, 4, 2.0, true}, {2, 3, 4, 0.5, true}});
    const Network net = decode(g);
    for (std::size_t i = 0; i < net.plan().size(); ++i)
        for (const auto& e : net.incoming(i)) EXPECT_NE(e.source, 2);
    EXPECT_EQ(net.activate(std::vector<double>{1.0, 0.0, 99.0})[0], 2.5);
    EXPECT_EQ(net.activate(std::vector<double>{1.0, 0.0, -7.0})[0], 2.5);
}

TEST(Decode, OutputWithoutEdgesReadsZero) {
    const Genome g = make_genome(1, 2, {}, {{1, 0, 2, 3.0, true}});
    const auto out = decode(g).activate(std::vector<double>{2.0});
    EXPECT_EQ(out[0], 6.0);
    EXPECT_EQ(out[1], 0.0);
}

TEST(Decode, CycleThrows) {
    const Genome g = make_genome(1, 1, {3, 4}, {{1, 0, 3, 1.0, true}, {2, 3, 4, 1.0, true}, {3, 4, 3, 1.0, true}, {4, 4, 2, 1.0, true}});
    EXPECT_THROW(decode(g), DecodeError);
}

TEST(Activate, ZeroWeightsGiveZero) {
    InnovationRegistry reg;
    Random rng(2);
    Genome g = new_minimal_genome(5, 2, reg, rng);
    for (auto& c : g.connections) c.weight = 0.0;
    const auto out = decode(g).activate(random_input(5, rng));
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], 0.0);
}

TEST(Activate, SingleConnectionIsLinear) {
    const Genome g = make_genome(1, 1, {}, {{1, 0, 2, 1.75, true}});
    EXPECT_EQ(decode(g).activate(std::vector<double>{0.4})[0], 1.75 * 0.4);
}

TEST(Activate, HiddenTanhNode) {
    const Genome g = make_genome(1, 1, {3}, {{1, 0, 3, 2.0, true}, {2, 3, 2, 0.5, true}});
    const double out = decode(g).activate(std::vector<double>{1.0})[0];
    EXPECT_NEAR(out, 0.48201, 1e-5);
    EXPECT_EQ(out, 0.5 * std::tanh(2.0));
}

TEST(Activate, WidthMismatchThrows) {
    InnovationRegistry reg;
    Random rng(3);
    const Network net = decode(new_minimal_genome(4, 2, reg, rng));
    EXPECT_THROW(net.activate(std::vector<double>(3, 0.0)), DimensionError);
}

TEST(Activate, MatchesRecursiveOracle) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        InnovationRegistry reg;
        Random rng(seed);
        Genome g = random_genome(2, 2, 4, reg, rng);
        if (g.nodes.size() > 8) continue;
        const Network net = decode(g);
        for (int i = 0; i < 100; ++i) {
            const auto x = random_input(2, rng);
            ASSERT_EQ(net.activate(x), oracle(g, x)) << "seed " << seed;
        }
    }
}

TEST(Activate, PruningDoesNotChangeOutputs) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        InnovationRegistry reg;
        Random rng(100 + seed);
        const Genome g = random_genome(4, 2, 12, reg, rng);
        const Network net = decode(g);
        for (int i = 0; i < 50; ++i) {
            const auto x = random_input(4, rng);
            ASSERT_EQ(net.activate(x), oracle(g, x));
        }
    }
}

TEST(Activate, PureFunction) {
    InnovationRegistry reg;
    Random rng(4);
    const Network net = decode(random_genome(6, 2, 10, reg, rng));
    const auto x = random_input(6, rng);
    const auto first = net.activate(x);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(net.activate(x), first);
}

TEST(ActivateBatch, MatchesScalarPath) {
    InnovationRegistry reg;
    Random rng(5);
    std::vector<Network> nets;
    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 100; ++i) {
        nets.push_back(decode(random_genome(5, 2, 10, reg, rng)));
        xs.push_back(random_input(5, rng));
    }
    const auto out = activate_batch(nets, xs);
    ASSERT_EQ(out.size(), 100u);
    for (std::size_t i = 0; i < nets.size(); ++i) EXPECT_EQ(out[i], nets[i].activate(xs[i]));
}

TEST(ActivateBatch, EmptyAndSingle) {
    EXPECT_TRUE(activate_batch({}, {}).empty());
    InnovationRegistry reg;
    Random rng(6);
    std::vector<Network> nets{decode(new_minimal_genome(3, 2, reg, rng))};
    std::vector<std::vector<double>> xs{random_input(3, rng)};
    EXPECT_EQ(activate_batch(nets, xs)[0], nets[0].activate(xs[0]));
}

TEST(ActivateBatch, BadElementNamesIndex) {
    InnovationRegistry reg;
    Random rng(7);
    std::vector<Network> nets{decode(new_minimal_genome(3, 2, reg, rng)), decode(new_minimal_genome(3, 2, reg, rng))};
    std::vector<std::vector<double>> xs{random_input(3, rng), random_input(2, rng)};
    try {
        activate_batch(nets, xs);
        FAIL();
    } catch (const DimensionError& e) {
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
}

TEST(ScaleAction, InRangePassThrough) {
    const auto a = scale_action(std::vector<double>{0.5, 0.0}, false);
    EXPECT_EQ(a.v, 0.5);
    EXPECT_EQ(a.omega, 0.0);
}

TEST(ScaleAction, ClampsWithoutReverse) {
    const auto a = scale_action(std::vector<double>{-3.0, 2.0}, false);
    EXPECT_EQ(a.v, 0.0);
    EXPECT_EQ(a.omega, 90.0);
}

TEST(ScaleAction, ReverseAllowed) {
    const auto a = scale_action(std::vector<double>{-0.4, -0.5}, true);
    EXPECT_EQ(a.v, -0.4);
    EXPECT_EQ(a.omega, -45.0);
}

TEST(ScaleAction, TooFewOutputs) {
    EXPECT_THROW(scale_action(std::vector<double>{1.0}, false), DimensionError);
}

TEST(ScaleAction, AlwaysLegal) {
    Random rng(8);
    for (int i = 0; i < 10000; ++i) {
        const double raw[2] = {rng.gaussian(0.0, 5.0), rng.gaussian(0.0, 5.0)};
        const bool rev = i % 2 == 0;
        const auto a = scale_action(raw, rev);
        ASSERT_LE(a.v, 1.0);
        ASSERT_GE(a.v, rev ? -1.0 : 0.0);
        ASSERT_LE(std::abs(a.omega), 90.0);
    }
}
