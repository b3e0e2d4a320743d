#include "synevo/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "synevo/errors.hpp"
#include "synevo/metrics.hpp"

namespace synevo {

double truncate_weight(double w, double tau) {
  const double m = std::fabs(w);
  return m >= tau ? m : 0.0;
}

double cluster_probability_from_sum(double truncated_sum, double normalizer) {
  if (!(normalizer > 0.0)) throw ConfigError("cluster normalizer Z must be positive");
  return std::min(1.0, std::exp(truncated_sum / normalizer - 1.0));
}

double cluster_probability(std::span<const double> kernel_weights, double tau, double normalizer) {
  if (!(tau >= 0.0)) throw ConfigError("truncation threshold must be non-negative");
  double s = 0.0;
  for (double w : kernel_weights) s += truncate_weight(w, tau);
  return cluster_probability_from_sum(s, normalizer);
}

double synapse_probability(double w, double normalizer) {
  if (!(normalizer > 0.0)) throw ConfigError("synapse normalizer z must be positive");
  return std::min(1.0, std::exp(std::fabs(w) / normalizer - 1.0));
}

void check_tau_policy(const TauPolicy& policy) {
  if (policy.kind == TauPolicy::Kind::fixed && !(policy.value >= 0.0)) {
    throw ConfigError("fixed truncation threshold must be non-negative");
  }
  if (policy.kind == TauPolicy::Kind::layer_percentile && !(policy.value >= 0.0 && policy.value <= 100.0)) {
    throw ConfigError("truncation percentile must lie in [0, 100]");
  }
}

double magnitude_percentile(const LayerParams& params, double pct) {
  std::vector<double> mags;
  const auto w = params.weights.values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (params.synapse_mask[i] == 1) mags.push_back(std::fabs(w[i]));
  }
  if (mags.empty()) return 0.0;
  std::sort(mags.begin(), mags.end());
  const double pos = pct / 100.0 * static_cast<double>(mags.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, mags.size() - 1);
  return mags[lo] + (pos - static_cast<double>(lo)) * (mags[hi] - mags[lo]);
}

const LayerField* SynapticProbabilityField::find(std::size_t layer) const {
  for (const auto& lf : layers) {
    if (lf.layer == layer) return &lf;
  }
  return nullptr;
}

std::optional<double> SynapticProbabilityField::cluster(const ClusterIndex& c) const {
  const LayerField* lf = find(c.layer);
  if (lf == nullptr || c.kernel >= lf->cluster_prob.size() || lf->cluster_live[c.kernel] == 0) return std::nullopt;
  return lf->cluster_prob[c.kernel];
}

std::optional<double> SynapticProbabilityField::synapse(std::size_t layer, std::size_t weight_index) const {
  const LayerField* lf = find(layer);
  if (lf == nullptr || weight_index >= lf->synapse_prob.size() || lf->synapse_live[weight_index] == 0) {
    return std::nullopt;
  }
  return lf->synapse_prob[weight_index];
}

SynapticProbabilityField build_field(const NetworkGenome& genome, const TauPolicy& tau) {
  check_tau_policy(tau);
  SynapticProbabilityField field;
  for (std::size_t li : weighted_layers(genome)) {
    const LayerSpec& l = genome.layers[li];
    const LayerParams& p = genome.params[li];
    const auto w = p.weights.values();
    const std::size_t K = l.kernel_count(), V = l.kernel_volume();

    LayerField lf;
    lf.layer = li;
    lf.tau = tau.kind == TauPolicy::Kind::fixed ? tau.value : magnitude_percentile(p, tau.value);
    lf.cluster_live = p.cluster_mask;
    lf.synapse_live = p.synapse_mask;
    lf.truncated_sum.assign(K, 0.0);
    lf.cluster_prob.assign(K, 0.0);
    lf.synapse_prob.assign(w.size(), 0.0);

    double max_sum = 0.0, max_mag = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (p.cluster_mask[k] == 0) continue;
      double s = 0.0;
      for (std::size_t j = k * V; j < (k + 1) * V; ++j) {
        if (p.synapse_mask[j] == 0) continue;
        s += truncate_weight(w[j], lf.tau);
        max_mag = std::max(max_mag, std::fabs(w[j]));
      }
      lf.truncated_sum[k] = s;
      max_sum = std::max(max_sum, s);
    }
    lf.cluster_normalizer = max_sum > 0.0 ? max_sum : 1.0;
    lf.synapse_normalizer = max_mag > 0.0 ? max_mag : 1.0;

    for (std::size_t k = 0; k < K; ++k) {
      if (p.cluster_mask[k] == 0) continue;
      lf.cluster_prob[k] = cluster_probability_from_sum(lf.truncated_sum[k], lf.cluster_normalizer);
      for (std::size_t j = k * V; j < (k + 1) * V; ++j) {
        if (p.synapse_mask[j] == 1) lf.synapse_prob[j] = synapse_probability(w[j], lf.synapse_normalizer);
      }
    }
    field.layers.push_back(std::move(lf));
  }
  return field;
}

std::string dump_field(const SynapticProbabilityField& field, const NetworkGenome& genome) {
  std::ostringstream out;
  out << "# clusters: layer kernel S p_cluster\n";
  for (const auto& lf : field.layers) {
    for (std::size_t k = 0; k < lf.cluster_prob.size(); ++k) {
      if (lf.cluster_live[k] == 0) continue;
      out << lf.layer << ' ' << k << ' ' << format_exact(lf.truncated_sum[k]) << ' '
          << format_exact(lf.cluster_prob[k]) << '\n';
    }
  }
  out << "# synapses: layer kernel index w p_synapse\n";
  for (const auto& lf : field.layers) {
    const auto w = genome.params.at(lf.layer).weights.values();
    const std::size_t V = lf.kernel_volume();
    for (std::size_t i = 0; i < lf.synapse_prob.size(); ++i) {
      if (lf.synapse_live[i] == 0) continue;
      out << lf.layer << ' ' << i / V << ' ' << i << ' ' << format_exact(w[i]) << ' '
          << format_exact(lf.synapse_prob[i]) << '\n';
    }
  }
  return out.str();
}

}  // namespace synevo
