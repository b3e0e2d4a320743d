#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synevo/tensor.hpp"

namespace synevo {

enum class LayerKind : std::uint8_t { convolution, fully_connected, relu, max_pool, softmax_cross_entropy };

const char* layer_kind_name(LayerKind kind) noexcept;
std::optional<LayerKind> parse_layer_kind(const std::string& name);

// Channels x height x width of one input sample.
struct InputShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t volume() const noexcept { return channels * height * width; }
  friend bool operator==(const InputShape&, const InputShape&) = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  // convolution: {out_channels, in_channels, kernel_h, kernel_w}
  // fully-connected: {out_features, in_features}
  // max-pool: {window}
  std::vector<std::size_t> kernel_shape;
  std::size_t stride = 1;
  std::size_t padding = 0;

  static LayerSpec convolution(std::size_t out, std::size_t in, std::size_t kernel, std::size_t stride = 1,
                               std::size_t padding = 0);
  static LayerSpec fully_connected(std::size_t out, std::size_t in);
  static LayerSpec relu();
  static LayerSpec max_pool(std::size_t window, std::size_t stride = 0);
  static LayerSpec softmax_cross_entropy();

  bool has_weights() const noexcept {
    return kind == LayerKind::convolution || kind == LayerKind::fully_connected;
  }
  // Number of clusters (kernels): output channels or output neurons.
  std::size_t kernel_count() const noexcept { return has_weights() ? kernel_shape[0] : 0; }
  // Weights per kernel.
  std::size_t kernel_volume() const noexcept;
  std::size_t weight_count() const noexcept { return kernel_count() * kernel_volume(); }
  Shape weight_shape() const { return has_weights() ? Shape(kernel_shape) : Shape{}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Activation shape after each layer, or InvalidInput if the stack is
// inconsistent (channel mismatch, kernel larger than input, ...).
std::vector<InputShape> infer_shapes(const InputShape& input, const std::vector<LayerSpec>& layers);

// Weights, bias and masks of one layer; empty for layers without weights.
struct LayerParams {
  Tensor weights;
  std::vector<double> bias;                // one per kernel, gated by the cluster mask
  std::vector<std::uint8_t> synapse_mask;  // one per weight, 0 or 1
  std::vector<std::uint8_t> cluster_mask;  // one per kernel, 0 or 1

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct ClusterIndex {
  std::size_t layer = 0;   // position in NetworkGenome::layers
  std::size_t kernel = 0;  // output channel / output neuron

  friend bool operator==(const ClusterIndex&, const ClusterIndex&) = default;
};

// A network H(N, S): topology, synaptic strengths and the two-level mask.
// Treated as a value; operations that change masks or weights return a
// new genome.
struct NetworkGenome {
  std::string id;
  std::optional<std::string> parent_id;
  std::uint32_t generation = 1;
  InputShape input;
  std::vector<LayerSpec> layers;
  std::vector<LayerParams> params;  // parallel to layers

  std::size_t class_count() const;

  friend bool operator==(const NetworkGenome&, const NetworkGenome&) = default;
};

// Genome with every mask set to 1 and Glorot-uniform weights,
// a = sqrt(6 / (fan_in + fan_out)); biases start at zero.
NetworkGenome make_ancestor(const InputShape& input, std::vector<LayerSpec> layers, std::uint64_t seed);

std::string content_id(const NetworkGenome& genome);

std::size_t count_live_synapses(const NetworkGenome& genome);
std::size_t count_live_synapses(const LayerParams& params);
std::size_t count_live_clusters(const NetworkGenome& genome);
std::size_t count_live_clusters(const LayerParams& params);
std::size_t count_total_synapses(const NetworkGenome& genome);
// Indices of layers that carry weights.
std::vector<std::size_t> weighted_layers(const NetworkGenome& genome);
// Live-synapse count of cluster (layer, kernel).
std::size_t live_synapses_in(const NetworkGenome& genome, const ClusterIndex& cluster);

struct Violation {
  enum class Kind {
    structure,             // params do not match the layer spec
    non_binary_mask,
    live_synapse_in_dead_cluster,
    empty_live_cluster,
    lineage_growth,        // offspring has more live synapses than its parent
    lineage_generation,    // generation index is not parent's + 1
    lineage_parent,        // parent id does not match
  };
  Kind kind;
  std::size_t layer = 0;
  std::size_t kernel = 0;
  std::size_t index = 0;
  std::string message;
};

// Every violated invariant, not just the first. Empty means valid.
std::vector<Violation> validate(const NetworkGenome& genome);
// Structural checks plus the lineage relation between parent and child.
std::vector<Violation> validate(const NetworkGenome& child, const NetworkGenome& parent);

}  // namespace synevo
