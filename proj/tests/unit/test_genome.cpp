#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "synevo/errors.hpp"
#include "synevo/genome.hpp"

using namespace synevo;

namespace {

NetworkGenome three_layer(std::uint64_t seed) {
  return make_ancestor({2, 8, 8},
                       {LayerSpec::convolution(4, 2, 3), LayerSpec::relu(), LayerSpec::max_pool(2),
                        LayerSpec::convolution(6, 4, 2), LayerSpec::relu(), LayerSpec::fully_connected(5, 6 * 2 * 2),
                        LayerSpec::softmax_cross_entropy()},
                       seed);
}

bool has_kind(const std::vector<Violation>& v, Violation::Kind kind) {
  for (const auto& x : v) {
    if (x.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("layer kinds round-trip through their names") {
  for (auto k : {LayerKind::convolution, LayerKind::fully_connected, LayerKind::relu, LayerKind::max_pool,
                 LayerKind::softmax_cross_entropy}) {
    CHECK(parse_layer_kind(layer_kind_name(k)) == k);
  }
  CHECK_FALSE(parse_layer_kind("dropout").has_value());
  CHECK(std::string(layer_kind_name(LayerKind::fully_connected)) == "fully-connected");
}

TEST_CASE("shape inference follows convolution arithmetic") {
  const auto shapes = infer_shapes({1, 28, 28},
                                   {LayerSpec::convolution(8, 1, 3), LayerSpec::relu(), LayerSpec::max_pool(2),
                                    LayerSpec::convolution(16, 8, 3), LayerSpec::relu(),
                                    LayerSpec::fully_connected(10, 16 * 11 * 11), LayerSpec::softmax_cross_entropy()});
  REQUIRE(shapes.size() == 7);
  CHECK((shapes[0] == InputShape{8, 26, 26}));
  CHECK((shapes[2] == InputShape{8, 13, 13}));
  CHECK((shapes[3] == InputShape{16, 11, 11}));
  CHECK((shapes[5] == InputShape{10, 1, 1}));

  const auto padded = infer_shapes({3, 7, 7}, {LayerSpec::convolution(2, 3, 3, 2, 1), LayerSpec::fully_connected(2, 32),
                                               LayerSpec::softmax_cross_entropy()});
  CHECK((padded[0] == InputShape{2, 4, 4}));
}

TEST_CASE("inconsistent layer stacks are rejected") {
  CHECK_THROWS_AS(infer_shapes({1, 4, 4}, {LayerSpec::fully_connected(2, 16)}), InvalidInput);
  CHECK_THROWS_AS(infer_shapes({1, 4, 4}, {LayerSpec::relu(), LayerSpec::softmax_cross_entropy()}), InvalidInput);
  CHECK_THROWS_AS(infer_shapes({1, 4, 4}, {LayerSpec::convolution(2, 3, 3), LayerSpec::fully_connected(2, 8),
                                           LayerSpec::softmax_cross_entropy()}),
                  InvalidInput);
  CHECK_THROWS_AS(infer_shapes({1, 2, 2}, {LayerSpec::convolution(2, 1, 3), LayerSpec::fully_connected(2, 2),
                                           LayerSpec::softmax_cross_entropy()}),
                  InvalidInput);
  CHECK_THROWS_AS(infer_shapes({1, 4, 4}, {LayerSpec::fully_connected(2, 15), LayerSpec::softmax_cross_entropy()}),
                  InvalidInput);
  LayerSpec zero = LayerSpec::fully_connected(2, 16);
  zero.kernel_shape[0] = 0;
  CHECK_THROWS_AS(infer_shapes({1, 4, 4}, {zero, LayerSpec::softmax_cross_entropy()}), InvalidInput);
}

TEST_CASE("ancestor has every mask set and Glorot-bounded weights") {
  const NetworkGenome g = three_layer(5);
  CHECK(g.generation == 1);
  CHECK_FALSE(g.parent_id.has_value());
  CHECK(validate(g).empty());
  CHECK(count_live_synapses(g) == count_total_synapses(g));
  CHECK(count_live_clusters(g) == 4 + 6 + 5);
  for (std::size_t l : weighted_layers(g)) {
    const auto& spec = g.layers[l];
    const std::size_t rf = spec.kind == LayerKind::convolution ? spec.kernel_shape[2] * spec.kernel_shape[3] : 1;
    const double fan_in = static_cast<double>(spec.kernel_volume());
    const double fan_out = static_cast<double>(spec.kernel_count() * rf);
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (double w : g.params[l].weights.values()) CHECK(std::abs(w) <= a);
    for (double b : g.params[l].bias) CHECK(b == 0.0);
  }
  CHECK(three_layer(5) == g);
  CHECK_FALSE(three_layer(6) == g);
}

TEST_CASE("live synapse count equals the mask sum") {
  NetworkGenome g = make_ancestor({1, 1, 50},
                                  {LayerSpec::fully_connected(40, 50), LayerSpec::fully_connected(50, 40),
                                   LayerSpec::softmax_cross_entropy()},
                                  1);
  CHECK(count_live_synapses(g) == 4000);
  for (auto& p : g.params) {
    std::fill(p.synapse_mask.begin(), p.synapse_mask.end(), std::uint8_t{0});
    std::fill(p.cluster_mask.begin(), p.cluster_mask.end(), std::uint8_t{0});
  }
  CHECK(count_live_synapses(g) == 0);
  CHECK(count_live_clusters(g) == 0);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const NetworkGenome r = oracle::random_masks(three_layer(seed), seed + 100, 0.2, 0.5);
    CHECK(count_live_synapses(r) == oracle::recount_live(r));
    CHECK(count_live_clusters(r) == oracle::recount_clusters(r));
    std::size_t by_cluster = 0;
    for (std::size_t l : weighted_layers(r)) {
      for (std::size_t k = 0; k < r.layers[l].kernel_count(); ++k) by_cluster += live_synapses_in(r, {l, k});
    }
    CHECK(by_cluster == count_live_synapses(r));
  }
}

TEST_CASE("content id depends on contents") {
  NetworkGenome g = three_layer(2);
  CHECK(g.id == content_id(g));
  CHECK(g.id.rfind("g0001-", 0) == 0);
  g.params[0].weights.data()[3] += 1e-9;
  CHECK(content_id(g) != g.id);
}

TEST_CASE("valid genomes produce no violations") {
  CHECK(validate(three_layer(3)).empty());
  CHECK(validate(oracle::random_masks(three_layer(3), 4, 0.3, 0.3)).empty());
}

TEST_CASE("a live synapse inside a dead cluster is named") {
  NetworkGenome g = three_layer(1);
  const std::size_t V = g.layers[3].kernel_volume();
  auto& p = g.params[3];
  std::fill_n(p.synapse_mask.begin() + static_cast<long>(2 * V), V, std::uint8_t{0});
  p.cluster_mask[2] = 0;
  CHECK(validate(g).empty());
  p.synapse_mask[2 * V + 5] = 1;
  const auto v = validate(g);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::live_synapse_in_dead_cluster);
  CHECK(v[0].layer == 3);
  CHECK(v[0].kernel == 2);
  CHECK(v[0].index == 2 * V + 5);
  CHECK(v[0].message.find("layer 3, kernel 2, index " + std::to_string(2 * V + 5)) != std::string::npos);
}

TEST_CASE("every violation is reported, not just the first") {
  NetworkGenome g = three_layer(1);
  const std::size_t V0 = g.layers[0].kernel_volume();
  g.params[0].cluster_mask[0] = 0;                              // dead kernel with live synapses
  g.params[0].synapse_mask[V0 + 1] = 2;                         // non-binary
  std::fill_n(g.params[5].synapse_mask.begin(), g.layers[5].kernel_volume(), std::uint8_t{0});  // empty live cluster
  const auto v = validate(g);
  CHECK(v.size() == V0 + 2);
  CHECK(has_kind(v, Violation::Kind::live_synapse_in_dead_cluster));
  CHECK(has_kind(v, Violation::Kind::non_binary_mask));
  CHECK(has_kind(v, Violation::Kind::empty_live_cluster));
}

TEST_CASE("structural mismatches are violations") {
  NetworkGenome g = three_layer(1);
  g.params[0].synapse_mask.pop_back();
  CHECK(has_kind(validate(g), Violation::Kind::structure));
  g = three_layer(1);
  g.params.pop_back();
  CHECK(has_kind(validate(g), Violation::Kind::structure));
}

TEST_CASE("lineage relation between parent and child") {
  const NetworkGenome parent = oracle::random_masks(three_layer(7), 8, 0.1, 0.3);
  NetworkGenome child = parent;
  child.parent_id = parent.id;
  child.generation = parent.generation + 1;
  child.id = content_id(child);
  CHECK(validate(child, parent).empty());

  // Flip one dead synapse of a live cluster back on.
  bool flipped = false;
  for (std::size_t l : weighted_layers(child)) {
    auto& p = child.params[l];
    const std::size_t V = child.layers[l].kernel_volume();
    for (std::size_t i = 0; i < p.synapse_mask.size() && !flipped; ++i) {
      if (p.synapse_mask[i] == 0 && p.cluster_mask[i / V] == 1) {
        p.synapse_mask[i] = 1;
        flipped = true;
      }
    }
  }
  REQUIRE(flipped);
  const auto v = validate(child, parent);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::lineage_growth);

  NetworkGenome orphan = parent;
  orphan.parent_id = "someone-else";
  orphan.generation = 5;
  const auto w = validate(orphan, parent);
  CHECK(has_kind(w, Violation::Kind::lineage_parent));
  CHECK(has_kind(w, Violation::Kind::lineage_generation));
}
