#include "synevo/genome.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include "synevo/errors.hpp"
#include "synevo/rng.hpp"

namespace synevo {

const char* layer_kind_name(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::convolution: return "convolution";
    case LayerKind::fully_connected: return "fully-connected";
    case LayerKind::relu: return "relu";
    case LayerKind::max_pool: return "max-pool";
    case LayerKind::softmax_cross_entropy: return "softmax-cross-entropy";
  }
  return "unknown";
}

std::optional<LayerKind> parse_layer_kind(const std::string& name) {
  for (auto kind : {LayerKind::convolution, LayerKind::fully_connected, LayerKind::relu, LayerKind::max_pool,
                    LayerKind::softmax_cross_entropy}) {
    if (name == layer_kind_name(kind)) return kind;
  }
  return std::nullopt;
}

LayerSpec LayerSpec::convolution(std::size_t out, std::size_t in, std::size_t kernel, std::size_t stride,
                                 std::size_t padding) {
  return {LayerKind::convolution, {out, in, kernel, kernel}, stride, padding};
}

LayerSpec LayerSpec::fully_connected(std::size_t out, std::size_t in) {
  return {LayerKind::fully_connected, {out, in}, 1, 0};
}

LayerSpec LayerSpec::relu() { return {LayerKind::relu, {}, 1, 0}; }

LayerSpec LayerSpec::max_pool(std::size_t window, std::size_t stride) {
  return {LayerKind::max_pool, {window}, stride == 0 ? window : stride, 0};
}

LayerSpec LayerSpec::softmax_cross_entropy() { return {LayerKind::softmax_cross_entropy, {}, 1, 0}; }

std::size_t LayerSpec::kernel_volume() const noexcept {
  if (!has_weights()) return 0;
  std::size_t v = 1;
  for (std::size_t i = 1; i < kernel_shape.size(); ++i) v *= kernel_shape[i];
  return v;
}

namespace {

std::string describe(std::size_t index, const LayerSpec& layer) {
  return "layer " + std::to_string(index) + " (" + layer_kind_name(layer.kind) + ")";
}

}  // namespace

std::vector<InputShape> infer_shapes(const InputShape& input, const std::vector<LayerSpec>& layers) {
  if (input.volume() == 0) throw InvalidInput("input shape has a zero dimension");
  if (layers.empty() || layers.back().kind != LayerKind::softmax_cross_entropy) {
    throw InvalidInput("network must end with a softmax-cross-entropy layer");
  }
  std::vector<InputShape> shapes;
  shapes.reserve(layers.size());
  InputShape cur = input;
  bool any_weights = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.stride == 0) throw InvalidInput(describe(i, l) + ": stride must be positive");
    switch (l.kind) {
      case LayerKind::convolution: {
        if (l.kernel_shape.size() != 4 || std::ranges::count(l.kernel_shape, 0) > 0) {
          throw InvalidInput(describe(i, l) + ": kernel shape must be 4 positive integers");
        }
        if (l.kernel_shape[1] != cur.channels) {
          throw InvalidInput(describe(i, l) + ": expects " + std::to_string(l.kernel_shape[1]) +
                             " input channels, got " + std::to_string(cur.channels));
        }
        const std::size_t h = cur.height + 2 * l.padding;
        const std::size_t w = cur.width + 2 * l.padding;
        if (h < l.kernel_shape[2] || w < l.kernel_shape[3]) {
          throw InvalidInput(describe(i, l) + ": kernel larger than padded input");
        }
        cur = {l.kernel_shape[0], (h - l.kernel_shape[2]) / l.stride + 1, (w - l.kernel_shape[3]) / l.stride + 1};
        any_weights = true;
        break;
      }
      case LayerKind::fully_connected:
        if (l.kernel_shape.size() != 2 || std::ranges::count(l.kernel_shape, 0) > 0) {
          throw InvalidInput(describe(i, l) + ": kernel shape must be 2 positive integers");
        }
        if (l.kernel_shape[1] != cur.volume()) {
          throw InvalidInput(describe(i, l) + ": expects " + std::to_string(l.kernel_shape[1]) +
                             " inputs, got " + std::to_string(cur.volume()));
        }
        cur = {l.kernel_shape[0], 1, 1};
        any_weights = true;
        break;
      case LayerKind::relu:
        break;
      case LayerKind::max_pool: {
        if (l.kernel_shape.size() != 1 || l.kernel_shape[0] == 0) {
          throw InvalidInput(describe(i, l) + ": max-pool needs one positive window size");
        }
        const std::size_t k = l.kernel_shape[0];
        if (cur.height < k || cur.width < k) throw InvalidInput(describe(i, l) + ": window larger than input");
        cur = {cur.channels, (cur.height - k) / l.stride + 1, (cur.width - k) / l.stride + 1};
        break;
      }
      case LayerKind::softmax_cross_entropy:
        if (i + 1 != layers.size()) throw InvalidInput(describe(i, l) + ": must be the last layer");
        if (cur.height != 1 || cur.width != 1) {
          throw InvalidInput(describe(i, l) + ": expects a flat score vector");
        }
        break;
    }
    shapes.push_back(cur);
  }
  if (!any_weights) throw InvalidInput("network has no weighted layer");
  return shapes;
}

std::size_t NetworkGenome::class_count() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->has_weights()) return it->kernel_count();
  }
  return 0;
}

NetworkGenome make_ancestor(const InputShape& input, std::vector<LayerSpec> layers, std::uint64_t seed) {
  const auto shapes = infer_shapes(input, layers);
  (void)shapes;
  NetworkGenome g;
  g.generation = 1;
  g.input = input;
  g.layers = std::move(layers);
  g.params.resize(g.layers.size());
  SequentialRng rng(seed);
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const LayerSpec& l = g.layers[i];
    if (!l.has_weights()) continue;
    LayerParams& p = g.params[i];
    const std::size_t receptive = l.kind == LayerKind::convolution ? l.kernel_shape[2] * l.kernel_shape[3] : 1;
    const double fan_in = static_cast<double>(l.kernel_shape[1] * receptive);
    const double fan_out = static_cast<double>(l.kernel_shape[0] * receptive);
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    p.weights = Tensor(l.weight_shape());
    for (double& w : p.weights.values()) w = rng.uniform(-a, a);
    p.bias.assign(l.kernel_count(), 0.0);
    p.synapse_mask.assign(l.weight_count(), 1);
    p.cluster_mask.assign(l.kernel_count(), 1);
  }
  g.id = content_id(g);
  return g;
}

std::string content_id(const NetworkGenome& genome) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  feed(genome.generation);
  if (genome.parent_id) {
    for (char c : *genome.parent_id) feed(static_cast<unsigned char>(c));
  }
  for (const LayerParams& p : genome.params) {
    for (double w : p.weights.values()) feed(std::bit_cast<std::uint64_t>(w));
    for (double b : p.bias) feed(std::bit_cast<std::uint64_t>(b));
    for (auto m : p.synapse_mask) feed(m);
    for (auto m : p.cluster_mask) feed(m);
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%04u-%016llx", genome.generation, static_cast<unsigned long long>(mix64(h)));
  return buf;
}

std::size_t count_live_synapses(const LayerParams& params) {
  return static_cast<std::size_t>(std::ranges::count(params.synapse_mask, std::uint8_t{1}));
}

std::size_t count_live_clusters(const LayerParams& params) {
  return static_cast<std::size_t>(std::ranges::count(params.cluster_mask, std::uint8_t{1}));
}

std::size_t count_live_synapses(const NetworkGenome& genome) {
  std::size_t n = 0;
  for (const auto& p : genome.params) n += count_live_synapses(p);
  return n;
}

std::size_t count_live_clusters(const NetworkGenome& genome) {
  std::size_t n = 0;
  for (const auto& p : genome.params) n += count_live_clusters(p);
  return n;
}

std::size_t count_total_synapses(const NetworkGenome& genome) {
  std::size_t n = 0;
  for (const auto& l : genome.layers) n += l.weight_count();
  return n;
}

std::vector<std::size_t> weighted_layers(const NetworkGenome& genome) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < genome.layers.size(); ++i) {
    if (genome.layers[i].has_weights()) out.push_back(i);
  }
  return out;
}

std::size_t live_synapses_in(const NetworkGenome& genome, const ClusterIndex& cluster) {
  const LayerSpec& l = genome.layers.at(cluster.layer);
  const LayerParams& p = genome.params.at(cluster.layer);
  const std::size_t vol = l.kernel_volume();
  if (cluster.kernel >= l.kernel_count()) throw InvalidInput("kernel index out of range");
  auto first = p.synapse_mask.begin() + static_cast<std::ptrdiff_t>(cluster.kernel * vol);
  return static_cast<std::size_t>(std::count(first, first + static_cast<std::ptrdiff_t>(vol), std::uint8_t{1}));
}

namespace {

void append_structure(std::vector<Violation>& out, std::size_t layer, const std::string& msg) {
  out.push_back({Violation::Kind::structure, layer, 0, 0, "layer " + std::to_string(layer) + ": " + msg});
}

}  // namespace

std::vector<Violation> validate(const NetworkGenome& genome) {
  std::vector<Violation> out;
  try {
    infer_shapes(genome.input, genome.layers);
  } catch (const InvalidInput& e) {
    out.push_back({Violation::Kind::structure, 0, 0, 0, e.what()});
  }
  if (genome.params.size() != genome.layers.size()) {
    out.push_back({Violation::Kind::structure, 0, 0, 0, "parameter blocks do not match layer count"});
    return out;
  }
  if (genome.generation == 0) out.push_back({Violation::Kind::structure, 0, 0, 0, "generation index must be >= 1"});

  for (std::size_t li = 0; li < genome.layers.size(); ++li) {
    const LayerSpec& l = genome.layers[li];
    const LayerParams& p = genome.params[li];
    if (!l.has_weights()) {
      if (!p.weights.empty() || !p.bias.empty() || !p.synapse_mask.empty() || !p.cluster_mask.empty()) {
        append_structure(out, li, "layer without weights carries parameters");
      }
      continue;
    }
    bool sized = true;
    if (p.weights.shape() != l.weight_shape()) {
      append_structure(out, li, "weight shape " + shape_string(p.weights.shape()) + " differs from spec " +
                                    shape_string(l.weight_shape()));
      sized = false;
    }
    if (p.bias.size() != l.kernel_count()) append_structure(out, li, "bias size differs from kernel count");
    if (p.synapse_mask.size() != l.weight_count()) {
      append_structure(out, li, "synapse mask size differs from weight count");
      sized = false;
    }
    if (p.cluster_mask.size() != l.kernel_count()) {
      append_structure(out, li, "cluster mask size differs from kernel count");
      sized = false;
    }
    if (!sized) continue;

    const std::size_t vol = l.kernel_volume();
    for (std::size_t k = 0; k < l.kernel_count(); ++k) {
      if (p.cluster_mask[k] > 1) {
        out.push_back({Violation::Kind::non_binary_mask, li, k, 0,
                       "cluster mask (" + std::to_string(li) + ", " + std::to_string(k) + ") is not 0/1"});
      }
      std::size_t live = 0;
      for (std::size_t j = 0; j < vol; ++j) {
        const std::size_t i = k * vol + j;
        const auto m = p.synapse_mask[i];
        if (m > 1) {
          out.push_back({Violation::Kind::non_binary_mask, li, k, i,
                         "synapse mask (" + std::to_string(li) + ", " + std::to_string(k) + ", " +
                             std::to_string(i) + ") is not 0/1"});
        }
        if (m == 1) {
          ++live;
          if (p.cluster_mask[k] == 0) {
            out.push_back({Violation::Kind::live_synapse_in_dead_cluster, li, k, i,
                           "live synapse (layer " + std::to_string(li) + ", kernel " + std::to_string(k) +
                               ", index " + std::to_string(i) + ") inside a dead cluster"});
          }
        }
      }
      if (p.cluster_mask[k] == 1 && live == 0) {
        out.push_back({Violation::Kind::empty_live_cluster, li, k, 0,
                       "cluster (layer " + std::to_string(li) + ", kernel " + std::to_string(k) +
                           ") is live but has no live synapse"});
      }
    }
  }
  return out;
}

std::vector<Violation> validate(const NetworkGenome& child, const NetworkGenome& parent) {
  std::vector<Violation> out = validate(child);
  if (child.parent_id != parent.id) {
    out.push_back({Violation::Kind::lineage_parent, 0, 0, 0,
                   "parent id " + child.parent_id.value_or("<none>") + " does not match " + parent.id});
  }
  if (child.generation != parent.generation + 1) {
    out.push_back({Violation::Kind::lineage_generation, 0, 0, 0,
                   "generation " + std::to_string(child.generation) + " does not follow parent generation " +
                       std::to_string(parent.generation)});
  }
  const std::size_t child_live = count_live_synapses(child);
  const std::size_t parent_live = count_live_synapses(parent);
  if (child_live > parent_live) {
    out.push_back({Violation::Kind::lineage_growth, 0, 0, 0,
                   "offspring has " + std::to_string(child_live) + " live synapses, parent has " +
                       std::to_string(parent_live)});
  }
  return out;
}

}  // namespace synevo
