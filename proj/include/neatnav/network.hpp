#pragma once

#include <span>
#include <vector>

#include "neatnav/genome.hpp"

namespace neatnav {

/// Motor command: v in m/s, omega in deg/s.
struct ActionCommand {
    double v = 0.0;
    double omega = 0.0;

    friend bool operator==(const ActionCommand&, const ActionCommand&) = default;
};

inline constexpr double kMaxSpeed = 1.0;        // m/s
inline constexpr double kMaxTurnRate = 90.0;    // deg/s

/// Clamp raw network outputs into a legal command. Non-finite raw values read as 0.
ActionCommand scale_action(std::span<const double> raw, bool allow_reverse);

/// Feedforward phenotype. Value slots: [0, n_inputs) observation, n_inputs the
/// bias (1.0), then one slot per computed node in plan order.
class Network {
public:
    struct Edge {
        int source = 0;
        double weight = 0.0;
    };
    struct Node {
        int node_id = 0;
        Activation activation = Activation::linear;
        std::uint32_t first_edge = 0;
        std::uint32_t edge_count = 0;
    };

    int n_inputs() const noexcept { return n_inputs_; }
    int n_outputs() const noexcept { return n_outputs_; }
    const std::vector<Node>& plan() const noexcept { return plan_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::span<const Edge> incoming(std::size_t plan_index) const;
    /// Plan indices of the outputs, in output order.
    const std::vector<int>& output_plan_index() const noexcept { return outputs_; }
    /// Observation indices read by at least one edge.
    const std::vector<int>& used_inputs() const noexcept { return used_inputs_; }
    std::size_t slot_count() const noexcept {
        return static_cast<std::size_t>(n_inputs_ + 1) + plan_.size();
    }

    /// Throws DimensionError when observation size differs from n_inputs.
    std::vector<double> activate(std::span<const double> observation) const;
    /// Allocation-free variant; `scratch` must hold slot_count() values.
    void activate(std::span<const double> observation, std::span<double> scratch,
                  std::span<double> outputs) const;

    /// True when both plans read the same slots in the same order.
    bool same_shape(const Network& other) const;

private:
    friend Network decode(const Genome& genome);

    int n_inputs_ = 0;
    int n_outputs_ = 0;
    std::vector<Node> plan_;
    std::vector<Edge> edges_;
    std::vector<int> outputs_;
    std::vector<int> used_inputs_;
};

/// Prunes disabled edges and nodes off every input-to-output path. Throws
/// DecodeError on a cycle.
Network decode(const Genome& genome);

/// Element i equals networks[i].activate(observations[i]) bit for bit. Throws
/// DimensionError naming the offending index.
std::vector<std::vector<double>> activate_batch(std::span<const Network> networks,
                                                std::span<const std::vector<double>> observations);

}  // namespace neatnav
