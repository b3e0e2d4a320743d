#include "synevo/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synevo/rng.hpp"

namespace synevo {

void check_environment(const EnvironmentalFactor& env) {
  if (!(env.budget_ratio > 0.0 && env.budget_ratio <= 1.0)) throw ConfigError("budget ratio must lie in (0, 1]");
  if (!(env.cluster_multiplier >= 0.0 && env.cluster_multiplier <= 1.0)) {
    throw ConfigError("cluster multiplier must lie in [0, 1]");
  }
  if (!(env.synapse_multiplier >= 0.0 && env.synapse_multiplier <= 1.0)) {
    throw ConfigError("synapse multiplier must lie in [0, 1]");
  }
  if (env.max_attempts == 0) throw ConfigError("max attempts must be at least 1");
}

namespace {

struct LayerSums {
  double preserved = 0.0;  // sum over clusters whose probability is not scaled
  double scaled = 0.0;     // sum over the remaining clusters
  std::size_t live = 0;
};

// Expected live synapses of one layer as a function of the budget scale g:
// preserved * g + scaled * g^2.
LayerSums layer_sums(const LayerField& lf, bool preserved_layer) {
  LayerSums s;
  const std::size_t V = lf.kernel_volume();
  for (std::size_t k = 0; k < lf.cluster_prob.size(); ++k) {
    if (lf.cluster_live[k] == 0) continue;
    double inner = 0.0;
    for (std::size_t j = k * V; j < (k + 1) * V; ++j) {
      if (lf.synapse_live[j] == 0) continue;
      inner += lf.synapse_prob[j];
      ++s.live;
    }
    (preserved_layer ? s.preserved : s.scaled) += lf.cluster_prob[k] * inner;
  }
  return s;
}

double expected_at(const std::vector<LayerSums>& sums, double g) {
  double e = 0.0;
  for (const auto& s : sums) e += s.preserved * g + s.scaled * g * g;
  return e;
}

// Largest g in [0, 1] with expected(g) <= target; expected is increasing.
double bisect_scale(const std::vector<LayerSums>& sums, double target) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected_at(sums, mid) <= target ? lo : hi) = mid;
  }
  return lo;
}

std::size_t last_weighted_layer(const SynapticProbabilityField& field) {
  return field.layers.empty() ? std::numeric_limits<std::size_t>::max() : field.layers.back().layer;
}

}  // namespace

double expected_live_synapses(const SynapticProbabilityField& field) {
  double e = 0.0;
  for (const auto& lf : field.layers) {
    const LayerSums s = layer_sums(lf, false);
    e += s.scaled;
  }
  return e;
}

ModulatedField effective_probabilities(const SynapticProbabilityField& field, const EnvironmentalFactor& env) {
  check_environment(env);
  ModulatedField out;
  out.field = field;
  const std::size_t output_layer = last_weighted_layer(field);
  for (auto& lf : out.field.layers) {
    const bool preserved = env.preserve_output_clusters && lf.layer == output_layer;
    for (std::size_t k = 0; k < lf.cluster_prob.size(); ++k) {
      if (lf.cluster_live[k] == 0) continue;
      lf.cluster_prob[k] = preserved ? 1.0 : std::clamp(lf.cluster_prob[k] * env.cluster_multiplier, 0.0, 1.0);
    }
    for (std::size_t j = 0; j < lf.synapse_prob.size(); ++j) {
      if (lf.synapse_live[j] == 0) continue;
      lf.synapse_prob[j] = std::clamp(lf.synapse_prob[j] * env.synapse_multiplier, 0.0, 1.0);
    }
  }

  std::vector<LayerSums> sums;
  for (const auto& lf : out.field.layers) {
    sums.push_back(layer_sums(lf, env.preserve_output_clusters && lf.layer == output_layer));
  }

  auto solve = [&](const std::vector<LayerSums>& group) {
    std::size_t live = 0;
    for (const auto& s : group) live += s.live;
    const double target = env.budget_ratio * static_cast<double>(live);
    if (expected_at(group, 1.0) <= target) return std::pair{1.0, true};
    return std::pair{bisect_scale(group, target), false};
  };

  if (env.scope == EnvironmentalFactor::Scope::global) {
    const auto [g, satisfied] = solve(sums);
    out.budget_scale = {g};
    out.budget_satisfied = satisfied;
  } else {
    out.budget_satisfied = true;
    for (const auto& s : sums) {
      const auto [g, satisfied] = solve({s});
      out.budget_scale.push_back(g);
      out.budget_satisfied = out.budget_satisfied && satisfied;
    }
  }

  for (std::size_t i = 0; i < out.field.layers.size(); ++i) {
    auto& lf = out.field.layers[i];
    const double g = out.budget_scale[env.scope == EnvironmentalFactor::Scope::global ? 0 : i];
    if (g == 1.0) continue;
    const bool preserved = env.preserve_output_clusters && lf.layer == output_layer;
    for (std::size_t k = 0; k < lf.cluster_prob.size(); ++k) {
      if (lf.cluster_live[k] == 1 && !preserved) lf.cluster_prob[k] *= g;
    }
    for (std::size_t j = 0; j < lf.synapse_prob.size(); ++j) {
      if (lf.synapse_live[j] == 1) lf.synapse_prob[j] *= g;
    }
  }
  return out;
}

namespace {

void check_field_matches(const NetworkGenome& parent, const SynapticProbabilityField& field) {
  const auto wl = weighted_layers(parent);
  if (wl.size() != field.layers.size()) throw InvalidInput("field does not match parent layers");
  for (std::size_t i = 0; i < wl.size(); ++i) {
    const LayerField& lf = field.layers[i];
    const LayerParams& p = parent.params[wl[i]];
    if (lf.layer != wl[i] || lf.cluster_prob.size() != p.cluster_mask.size() ||
        lf.synapse_prob.size() != p.synapse_mask.size() || lf.cluster_live != p.cluster_mask ||
        lf.synapse_live != p.synapse_mask) {
      throw InvalidInput("field layer " + std::to_string(lf.layer) + " was not built from this parent");
    }
  }
}

struct Draw {
  std::vector<LayerParams> params;
  std::vector<std::size_t> layer_live;
  std::size_t live = 0;
};

Draw draw_masks(const NetworkGenome& parent, const SynapticProbabilityField& field, std::uint64_t seed,
                std::uint64_t attempt, std::size_t& draws) {
  Draw d;
  d.params = parent.params;
  for (const auto& lf : field.layers) {
    LayerParams& p = d.params[lf.layer];
    const std::size_t V = lf.kernel_volume();
    std::size_t layer_live = 0;
    for (std::size_t k = 0; k < lf.cluster_prob.size(); ++k) {
      if (p.cluster_mask[k] == 0) continue;
      const CounterRng rng(seed, cluster_stream_id(attempt, lf.layer, k));
      ++draws;
      std::size_t kept = 0;
      if (rng.bernoulli(0, lf.cluster_prob[k])) {
        for (std::size_t j = 0; j < V; ++j) {
          const std::size_t i = k * V + j;
          if (p.synapse_mask[i] == 0) continue;
          ++draws;
          const bool keep = rng.bernoulli(1 + j, lf.synapse_prob[i]);
          p.synapse_mask[i] = keep ? 1 : 0;
          kept += keep ? 1 : 0;
        }
      } else {
        std::fill_n(p.synapse_mask.begin() + static_cast<std::ptrdiff_t>(k * V), V, std::uint8_t{0});
      }
      if (kept == 0) p.cluster_mask[k] = 0;
      layer_live += kept;
    }
    d.layer_live.push_back(layer_live);
    d.live += layer_live;
  }
  return d;
}

NetworkGenome make_offspring(const NetworkGenome& parent, std::vector<LayerParams> params) {
  NetworkGenome child;
  child.parent_id = parent.id;
  child.generation = parent.generation + 1;
  child.input = parent.input;
  child.layers = parent.layers;
  child.params = std::move(params);
  for (auto& p : child.params) {
    auto w = p.weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (p.synapse_mask[i] == 0) w[i] = 0.0;
    }
    for (std::size_t k = 0; k < p.bias.size(); ++k) {
      if (p.cluster_mask[k] == 0) p.bias[k] = 0.0;
    }
  }
  child.id = content_id(child);
  return child;
}

}  // namespace

SynthesisOutcome sample_offspring(const NetworkGenome& parent, const SynapticProbabilityField& field,
                                  const EnvironmentalFactor& env, std::uint64_t seed) {
  check_field_matches(parent, field);
  ModulatedField modulated = effective_probabilities(field, env);

  const std::size_t parent_live = count_live_synapses(parent);
  if (parent_live == 0) throw DegenerateOffspring("parent has no live synapse");
  std::vector<std::size_t> parent_layer_live;
  for (const auto& lf : field.layers) parent_layer_live.push_back(count_live_synapses(parent.params[lf.layer]));

  const bool strict = env.enforcement == EnvironmentalFactor::Enforcement::strict;
  std::size_t draws = 0;
  std::optional<Draw> best;
  double best_ratio = std::numeric_limits<double>::infinity();
  std::size_t attempt = 0;
  for (; attempt < env.max_attempts; ++attempt) {
    Draw d = draw_masks(parent, modulated.field, seed, attempt, draws);
    if (d.live == 0) {
      // Under strict enforcement an empty draw is rejected like any other.
      if (!strict) throw DegenerateOffspring("every synapse was sampled dead");
      continue;
    }
    const double ratio = static_cast<double>(d.live) / static_cast<double>(parent_live);

    bool within = ratio <= env.budget_ratio;
    if (env.scope == EnvironmentalFactor::Scope::per_layer) {
      for (std::size_t i = 0; i < d.layer_live.size(); ++i) {
        if (parent_layer_live[i] > 0 &&
            static_cast<double>(d.layer_live[i]) > env.budget_ratio * static_cast<double>(parent_layer_live[i])) {
          within = false;
        }
      }
    }
    if (!strict || within) {
      SynthesisOutcome out;
      out.offspring = make_offspring(parent, std::move(d.params));
      out.draws = draws;
      out.attempts = attempt + 1;
      out.realized_ratio = ratio;
      out.probabilities = std::move(modulated);
      return out;
    }
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = std::move(d);
    }
  }

  if (!best) throw DegenerateOffspring("every synapse was sampled dead in all " + std::to_string(attempt) + " attempts");
  SynthesisOutcome fallback;
  fallback.offspring = make_offspring(parent, std::move(best->params));
  fallback.draws = draws;
  fallback.attempts = attempt;
  fallback.realized_ratio = best_ratio;
  fallback.probabilities = std::move(modulated);
  throw SynthesisFailed("no sample within budget " + std::to_string(env.budget_ratio) + " after " +
                            std::to_string(attempt) + " attempts (best ratio " + std::to_string(best_ratio) + ")",
                        std::move(fallback));
}

double realized_ratio(const NetworkGenome& parent, const NetworkGenome& offspring) {
  if (offspring.parent_id != parent.id) {
    throw InvalidInput("offspring parent id " + offspring.parent_id.value_or("<none>") + " is not " + parent.id);
  }
  const std::size_t parent_live = count_live_synapses(parent);
  if (parent_live == 0) throw UndefinedRatio("parent has no live synapse");
  return static_cast<double>(count_live_synapses(offspring)) / static_cast<double>(parent_live);
}

}  // namespace synevo
