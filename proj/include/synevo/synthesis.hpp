#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "synevo/encoding.hpp"
#include "synevo/errors.hpp"
#include "synevo/genome.hpp"

namespace synevo {

// Environmental factors F_c and F_s, realized as probability multipliers.
struct EnvironmentalFactor {
  enum class Enforcement : std::uint8_t { expected, strict };
  enum class Scope : std::uint8_t { global, per_layer };

  double budget_ratio = 0.8;
  double cluster_multiplier = 1.0;  // gamma_c
  double synapse_multiplier = 1.0;  // gamma_s
  Enforcement enforcement = Enforcement::expected;
  Scope scope = Scope::global;
  std::size_t max_attempts = 64;
  // Keep every output neuron of the final weighted layer alive (F_c
  // cancels the cluster probability there). Synapse-level sampling still
  // applies to that layer.
  bool preserve_output_clusters = false;
};

void check_environment(const EnvironmentalFactor& env);

struct ModulatedField {
  SynapticProbabilityField field;
  // Budget scalar found by bisection: one entry for global scope, one per
  // weighted layer for per-layer scope.
  std::vector<double> budget_scale;
  // True when the expected live count was already within budget at scale 1.
  bool budget_satisfied = false;
};

// Expected live-synapse count sum_c p_c * sum_{i in c} p_i over a field.
double expected_live_synapses(const SynapticProbabilityField& field);

// Applies gamma_c, gamma_s (clamped to [0, 1]) and then a bisection-tuned
// scalar so the expected live count equals budget_ratio times the parent
// live count within 0.1%.
ModulatedField effective_probabilities(const SynapticProbabilityField& field, const EnvironmentalFactor& env);

struct SynthesisOutcome {
  NetworkGenome offspring;
  std::size_t draws = 0;     // Bernoulli draws across all attempts
  std::size_t attempts = 0;  // 1 when the first sample was accepted
  double realized_ratio = 0.0;
  ModulatedField probabilities;
};

class SynthesisFailed : public Error {
 public:
  SynthesisFailed(const std::string& detail, SynthesisOutcome best)
      : Error(detail), best_(std::move(best)) {}
  const SynthesisOutcome& best() const noexcept { return best_; }

 private:
  SynthesisOutcome best_;
};

// Draws a cluster Bernoulli per live parent cluster and, for clusters that
// survive, an independent Bernoulli per live synapse. Cluster (layer, kernel)
// of attempt a reads stream cluster_stream_id(a, layer, kernel): counter 0 is
// the cluster draw, counter 1 + j the draw of synapse j within the kernel.
SynthesisOutcome sample_offspring(const NetworkGenome& parent, const SynapticProbabilityField& field,
                                  const EnvironmentalFactor& env, std::uint64_t seed);

double realized_ratio(const NetworkGenome& parent, const NetworkGenome& offspring);

}  // namespace synevo
