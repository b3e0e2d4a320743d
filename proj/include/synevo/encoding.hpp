#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synevo/genome.hpp"

namespace synevo {

// Magnitude thresholding: |w| if |w| >= tau, else 0.
double truncate_weight(double w, double tau);

// exp(S / Z - 1) with S the sum of truncated weights of the kernel.
// Clamped to at most 1. Throws ConfigError unless Z > 0.
double cluster_probability(std::span<const double> kernel_weights, double tau, double normalizer);
// Same, for a precomputed truncated sum S.
double cluster_probability_from_sum(double truncated_sum, double normalizer);

// exp(|w| / z - 1), clamped to at most 1. Throws ConfigError unless z > 0.
double synapse_probability(double w, double normalizer);

// How the truncation threshold of each layer is chosen.
struct TauPolicy {
  enum class Kind { fixed, layer_percentile };
  Kind kind = Kind::layer_percentile;
  double value = 25.0;  // threshold for fixed, percentile in [0, 100] otherwise

  static TauPolicy fixed(double tau) { return {Kind::fixed, tau}; }
  static TauPolicy percentile(double pct) { return {Kind::layer_percentile, pct}; }
};

void check_tau_policy(const TauPolicy& policy);

// Linear-interpolation percentile of |w| over the live synapses of a layer.
double magnitude_percentile(const LayerParams& params, double pct);

struct LayerField {
  std::size_t layer = 0;
  double tau = 0.0;
  double cluster_normalizer = 1.0;  // Z
  double synapse_normalizer = 1.0;  // z
  std::vector<double> truncated_sum;  // S per kernel
  std::vector<double> cluster_prob;   // per kernel; meaningful only where cluster_live
  std::vector<double> synapse_prob;   // per weight; meaningful only where synapse_live
  std::vector<std::uint8_t> cluster_live;
  std::vector<std::uint8_t> synapse_live;

  std::size_t kernel_volume() const noexcept {
    return cluster_prob.empty() ? 0 : synapse_prob.size() / cluster_prob.size();
  }
};

// Cluster and synapse synthesis probabilities for one generation.
struct SynapticProbabilityField {
  std::vector<LayerField> layers;  // one per weighted layer, in network order

  const LayerField* find(std::size_t layer) const;
  // nullopt for structures that are dead in the ancestor.
  std::optional<double> cluster(const ClusterIndex& c) const;
  std::optional<double> synapse(std::size_t layer, std::size_t weight_index) const;
};

// Z per layer is the largest truncated sum over live clusters (1 when all
// sums are zero); z per layer is the largest live |w| (1 when all zero).
SynapticProbabilityField build_field(const NetworkGenome& genome, const TauPolicy& tau);

// Text dump: a cluster section (layer kernel S p_cluster) then a synapse
// section (layer kernel index w p_synapse), live structures only.
std::string dump_field(const SynapticProbabilityField& field, const NetworkGenome& genome);

}  // namespace synevo
