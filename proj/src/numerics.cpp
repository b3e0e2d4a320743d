#include "synevo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "synevo/errors.hpp"
#include "synevo/rng.hpp"

namespace synevo {

void check_train_config(const TrainConfig& config) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("learning rate must be a finite non-negative number");
  }
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (config.batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (config.epochs == 0) throw ConfigError("epochs must be at least 1");
  if (!(config.divergence_ratio > 0.0)) throw ConfigError("divergence ratio must be positive");
}

namespace {

// Weights and biases as the network sees them: raw values times masks.
struct Effective {
  std::vector<double> weights;
  std::vector<double> bias;
};

std::vector<Effective> effective_params(const NetworkGenome& g, MaskMode mode) {
  std::vector<Effective> out(g.layers.size());
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    if (!g.layers[i].has_weights()) continue;
    const LayerParams& p = g.params[i];
    auto w = p.weights.values();
    out[i].weights.assign(w.begin(), w.end());
    out[i].bias = p.bias;
    if (mode == MaskMode::apply) {
      for (std::size_t j = 0; j < out[i].weights.size(); ++j) out[i].weights[j] *= p.synapse_mask[j];
      for (std::size_t k = 0; k < out[i].bias.size(); ++k) out[i].bias[k] *= p.cluster_mask[k];
    }
  }
  return out;
}

struct Trace {
  std::vector<Tensor> act;                       // act[0] = input, act[i + 1] = output of layer i
  std::vector<std::vector<std::uint32_t>> pick;  // max-pool argmax (flat input index) per layer
};

void check_batch(const NetworkGenome& g, const Tensor& batch) {
  const Shape want{batch.rank() > 0 ? batch.dim(0) : 0, g.input.channels, g.input.height, g.input.width};
  if (batch.rank() != 4 || batch.dim(0) == 0 || batch.shape() != want) {
    throw InvalidInput("batch shape " + shape_string(batch.shape()) + " does not match network input " +
                       shape_string({g.input.channels, g.input.height, g.input.width}));
  }
}

void require_finite(const Tensor& t, std::size_t layer, const LayerSpec& spec) {
  if (!t.all_finite()) {
    throw NumericOverflow("non-finite activation after layer " + std::to_string(layer) + " (" +
                          layer_kind_name(spec.kind) + ")");
  }
}

Tensor conv_forward(const LayerSpec& l, const Effective& p, const Tensor& in, const InputShape& out_shape) {
  const std::size_t B = in.dim(0), C = in.dim(1), H = in.dim(2), W = in.dim(3);
  const std::size_t O = l.kernel_shape[0], KH = l.kernel_shape[2], KW = l.kernel_shape[3];
  const std::size_t OH = out_shape.height, OW = out_shape.width, s = l.stride;
  const auto pad = static_cast<std::ptrdiff_t>(l.padding);
  Tensor out({B, O, OH, OW});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t o = 0; o < O; ++o) {
      double* dst = out.data() + ((b * O + o) * OH) * OW;
      std::fill(dst, dst + OH * OW, p.bias[o]);
      for (std::size_t c = 0; c < C; ++c) {
        const double* src = in.data() + ((b * C + c) * H) * W;
        const double* ker = p.weights.data() + ((o * C + c) * KH) * KW;
        for (std::size_t ky = 0; ky < KH; ++ky) {
          for (std::size_t kx = 0; kx < KW; ++kx) {
            const double w = ker[ky * KW + kx];
            if (w == 0.0) continue;
            for (std::size_t y = 0; y < OH; ++y) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * s + ky) - pad;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
              const double* row = src + static_cast<std::size_t>(iy) * W;
              double* orow = dst + y * OW;
              for (std::size_t x = 0; x < OW; ++x) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * s + kx) - pad;
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                orow[x] += w * row[ix];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

// Accumulates weight/bias gradients and returns the input gradient.
Tensor conv_backward(const LayerSpec& l, const Effective& p, const Tensor& in, const Tensor& dout,
                     std::vector<double>& dw, std::vector<double>& db) {
  const std::size_t B = in.dim(0), C = in.dim(1), H = in.dim(2), W = in.dim(3);
  const std::size_t O = l.kernel_shape[0], KH = l.kernel_shape[2], KW = l.kernel_shape[3];
  const std::size_t OH = dout.dim(2), OW = dout.dim(3), s = l.stride;
  const auto pad = static_cast<std::ptrdiff_t>(l.padding);
  Tensor din(in.shape());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t o = 0; o < O; ++o) {
      const double* g = dout.data() + ((b * O + o) * OH) * OW;
      double gsum = 0.0;
      for (std::size_t i = 0; i < OH * OW; ++i) gsum += g[i];
      db[o] += gsum;
      for (std::size_t c = 0; c < C; ++c) {
        const double* src = in.data() + ((b * C + c) * H) * W;
        double* dsrc = din.data() + ((b * C + c) * H) * W;
        const std::size_t kbase = ((o * C + c) * KH) * KW;
        for (std::size_t ky = 0; ky < KH; ++ky) {
          for (std::size_t kx = 0; kx < KW; ++kx) {
            const double w = p.weights[kbase + ky * KW + kx];
            double acc = 0.0;
            for (std::size_t y = 0; y < OH; ++y) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * s + ky) - pad;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
              const double* row = src + static_cast<std::size_t>(iy) * W;
              double* drow = dsrc + static_cast<std::size_t>(iy) * W;
              const double* grow = g + y * OW;
              for (std::size_t x = 0; x < OW; ++x) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * s + kx) - pad;
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                acc += grow[x] * row[ix];
                drow[ix] += w * grow[x];
              }
            }
            dw[kbase + ky * KW + kx] += acc;
          }
        }
      }
    }
  }
  return din;
}

Tensor fc_forward(const LayerSpec& l, const Effective& p, const Tensor& in) {
  const std::size_t B = in.dim(0), O = l.kernel_shape[0], I = l.kernel_shape[1];
  Tensor out({B, O, 1, 1});
  for (std::size_t b = 0; b < B; ++b) {
    const double* x = in.data() + b * I;
    for (std::size_t o = 0; o < O; ++o) {
      const double* w = p.weights.data() + o * I;
      double acc = p.bias[o];
      for (std::size_t i = 0; i < I; ++i) acc += w[i] * x[i];
      out[b * O + o] = acc;
    }
  }
  return out;
}

Tensor fc_backward(const LayerSpec& l, const Effective& p, const Tensor& in, const Tensor& dout,
                   std::vector<double>& dw, std::vector<double>& db) {
  const std::size_t B = in.dim(0), O = l.kernel_shape[0], I = l.kernel_shape[1];
  Tensor din(in.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const double* x = in.data() + b * I;
    double* dx = din.data() + b * I;
    for (std::size_t o = 0; o < O; ++o) {
      const double g = dout[b * O + o];
      db[o] += g;
      const double* w = p.weights.data() + o * I;
      double* gw = dw.data() + o * I;
      for (std::size_t i = 0; i < I; ++i) {
        gw[i] += g * x[i];
        dx[i] += g * w[i];
      }
    }
  }
  return din;
}

Tensor pool_forward(const LayerSpec& l, const Tensor& in, const InputShape& out_shape, std::vector<std::uint32_t>& pick) {
  const std::size_t B = in.dim(0), C = in.dim(1), H = in.dim(2), W = in.dim(3);
  const std::size_t K = l.kernel_shape[0], s = l.stride, OH = out_shape.height, OW = out_shape.width;
  Tensor out({B, C, OH, OW});
  pick.assign(out.size(), 0);
  std::size_t o = 0;
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    const std::size_t base = bc * H * W;
    for (std::size_t y = 0; y < OH; ++y) {
      for (std::size_t x = 0; x < OW; ++x, ++o) {
        std::size_t best = base + (y * s) * W + x * s;
        for (std::size_t ky = 0; ky < K; ++ky) {
          for (std::size_t kx = 0; kx < K; ++kx) {
            const std::size_t idx = base + (y * s + ky) * W + (x * s + kx);
            if (in[idx] > in[best]) best = idx;
          }
        }
        out[o] = in[best];
        pick[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return out;
}

void softmax_rows(Tensor& t) {
  const std::size_t B = t.dim(0), K = t.size() / B;
  for (std::size_t b = 0; b < B; ++b) {
    double* z = t.data() + b * K;
    const double m = *std::max_element(z, z + K);
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      z[k] = std::exp(z[k] - m);
      sum += z[k];
    }
    for (std::size_t k = 0; k < K; ++k) z[k] /= sum;
  }
}

// Runs every layer; the final softmax layer's activation holds the logits
// (probabilities are derived by callers).
Trace run_forward(const NetworkGenome& g, const std::vector<Effective>& eff, const Tensor& batch) {
  check_batch(g, batch);
  const auto shapes = infer_shapes(g.input, g.layers);
  Trace t;
  t.act.reserve(g.layers.size() + 1);
  t.pick.resize(g.layers.size());
  t.act.push_back(batch);
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const LayerSpec& l = g.layers[i];
    const Tensor& in = t.act.back();
    switch (l.kind) {
      case LayerKind::convolution:
        t.act.push_back(conv_forward(l, eff[i], in, shapes[i]));
        break;
      case LayerKind::fully_connected:
        t.act.push_back(fc_forward(l, eff[i], in));
        break;
      case LayerKind::relu: {
        Tensor out = in;
        for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
        t.act.push_back(std::move(out));
        break;
      }
      case LayerKind::max_pool:
        t.act.push_back(pool_forward(l, in, shapes[i], t.pick[i]));
        break;
      case LayerKind::softmax_cross_entropy:
        t.act.push_back(in);
        break;
    }
    require_finite(t.act.back(), i, l);
  }
  return t;
}

void check_labels(const NetworkGenome& g, const Tensor& batch, std::span<const int> labels) {
  if (labels.size() != batch.dim(0)) {
    throw InvalidInput("got " + std::to_string(labels.size()) + " labels for a batch of " +
                       std::to_string(batch.dim(0)));
  }
  const auto classes = static_cast<int>(g.class_count());
  for (int y : labels) {
    if (y < 0 || y >= classes) throw InvalidInput("label " + std::to_string(y) + " outside [0, " +
                                                  std::to_string(classes) + ")");
  }
}

// Mean cross-entropy and its gradient w.r.t. the logits.
double cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* dlogits) {
  const std::size_t B = logits.dim(0), K = logits.size() / B;
  double total = 0.0;
  if (dlogits) *dlogits = Tensor(logits.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const double* z = logits.data() + b * K;
    const double m = *std::max_element(z, z + K);
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(z[k] - m);
    const double lse = m + std::log(sum);
    total += lse - z[labels[b]];
    if (dlogits) {
      double* d = dlogits->data() + b * K;
      for (std::size_t k = 0; k < K; ++k) d[k] = std::exp(z[k] - lse) / static_cast<double>(B);
      d[labels[b]] -= 1.0 / static_cast<double>(B);
    }
  }
  return total / static_cast<double>(B);
}

}  // namespace

Tensor forward(const NetworkGenome& genome, const Tensor& batch, MaskMode masks) {
  Trace t = run_forward(genome, effective_params(genome, masks), batch);
  Tensor out = std::move(t.act.back());
  softmax_rows(out);
  return Tensor({out.dim(0), out.size() / out.dim(0)}, std::vector<double>(out.values().begin(), out.values().end()));
}

double loss(const NetworkGenome& genome, const Tensor& batch, std::span<const int> labels) {
  Trace t = run_forward(genome, effective_params(genome, MaskMode::apply), batch);
  check_labels(genome, batch, labels);
  return cross_entropy(t.act.back(), labels, nullptr);
}

LossAndGradients backward(const NetworkGenome& genome, const Tensor& batch, std::span<const int> labels) {
  const auto eff = effective_params(genome, MaskMode::apply);
  Trace t = run_forward(genome, eff, batch);
  check_labels(genome, batch, labels);

  LossAndGradients result;
  Tensor grad;
  result.loss = cross_entropy(t.act.back(), labels, &grad);
  if (!std::isfinite(result.loss)) throw NumericOverflow("non-finite loss");

  const std::size_t n = genome.layers.size();
  result.gradients.weights.resize(n);
  result.gradients.bias.resize(n);
  for (std::size_t i = n; i-- > 0;) {
    const LayerSpec& l = genome.layers[i];
    const Tensor& in = t.act[i];
    switch (l.kind) {
      case LayerKind::softmax_cross_entropy:
        break;  // grad already holds d loss / d logits
      case LayerKind::relu:
        for (std::size_t j = 0; j < grad.size(); ++j) {
          if (!(in[j] > 0.0)) grad[j] = 0.0;
        }
        break;
      case LayerKind::max_pool: {
        Tensor din(in.shape());
        for (std::size_t j = 0; j < grad.size(); ++j) din[t.pick[i][j]] += grad[j];
        grad = std::move(din);
        break;
      }
      case LayerKind::convolution:
      case LayerKind::fully_connected: {
        std::vector<double> dw(l.weight_count(), 0.0), db(l.kernel_count(), 0.0);
        Tensor dout = std::move(grad);
        grad = l.kind == LayerKind::convolution ? conv_backward(l, eff[i], in, dout, dw, db)
                                                : fc_backward(l, eff[i], in, dout, dw, db);
        const LayerParams& p = genome.params[i];
        for (std::size_t j = 0; j < dw.size(); ++j) dw[j] *= p.synapse_mask[j];
        for (std::size_t k = 0; k < db.size(); ++k) db[k] *= p.cluster_mask[k];
        result.gradients.weights[i] = Tensor(l.weight_shape(), std::move(dw));
        result.gradients.bias[i] = std::move(db);
        break;
      }
    }
  }
  return result;
}

TrainResult sgd_train(NetworkGenome genome, const Dataset& data, const TrainConfig& config) {
  check_train_config(config);
  check_dataset(data);
  if (data.size() == 0) throw InvalidInput("training set is empty");

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SequentialRng rng(config.seed);

  std::vector<std::vector<double>> vel_w(genome.layers.size()), vel_b(genome.layers.size());
  for (std::size_t i = 0; i < genome.layers.size(); ++i) {
    if (!genome.layers[i].has_weights()) continue;
    vel_w[i].assign(genome.layers[i].weight_count(), 0.0);
    vel_b[i].assign(genome.layers[i].kernel_count(), 0.0);
  }

  const double loss_limit =
      config.divergence_ratio * std::log(static_cast<double>(std::max<std::size_t>(genome.class_count(), 2)));

  TrainResult result;
  std::vector<int> labels;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0.0;
    for (std::size_t first = 0; first < n; first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - first);
      const Tensor batch = data.gather(order, first, count);
      labels.resize(count);
      for (std::size_t j = 0; j < count; ++j) labels[j] = data.labels[order[first + j]];

      LossAndGradients lg;
      try {
        lg = backward(genome, batch, labels);
      } catch (const NumericOverflow& e) {
        throw TrainingDiverged(epoch, e.what());
      }
      if (lg.loss > loss_limit) {
        throw TrainingDiverged(epoch, "batch loss " + std::to_string(lg.loss) + " exceeds " +
                                          std::to_string(loss_limit));
      }
      total += lg.loss * static_cast<double>(count);

      bool finite = true;
      for (std::size_t i = 0; i < genome.layers.size(); ++i) {
        if (!genome.layers[i].has_weights()) continue;
        auto w = genome.params[i].weights.values();
        const auto& gw = lg.gradients.weights[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
          vel_w[i][j] = config.momentum * vel_w[i][j] + gw[j];
          w[j] -= config.learning_rate * vel_w[i][j];
          finite = finite && std::isfinite(w[j]);
        }
        auto& b = genome.params[i].bias;
        for (std::size_t k = 0; k < b.size(); ++k) {
          vel_b[i][k] = config.momentum * vel_b[i][k] + lg.gradients.bias[i][k];
          b[k] -= config.learning_rate * vel_b[i][k];
          finite = finite && std::isfinite(b[k]);
        }
      }
      if (!finite) throw TrainingDiverged(epoch, "non-finite weights after update");
    }
    const double epoch_loss = total / static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) throw TrainingDiverged(epoch, "non-finite epoch loss");
    result.epoch_losses.push_back(epoch_loss);
  }
  result.final_loss = result.epoch_losses.back();
  genome.id = content_id(genome);
  result.genome = std::move(genome);
  return result;
}

std::vector<int> predict(const NetworkGenome& genome, const Dataset& data) {
  check_dataset(data);
  constexpr std::size_t kChunk = 250;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto eff = effective_params(genome, MaskMode::apply);
  std::vector<int> out;
  out.reserve(data.size());
  for (std::size_t first = 0; first < data.size(); first += kChunk) {
    const std::size_t count = std::min(kChunk, data.size() - first);
    Trace t = run_forward(genome, eff, data.gather(order, first, count));
    const Tensor& z = t.act.back();
    const std::size_t K = z.size() / count;
    for (std::size_t b = 0; b < count; ++b) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < K; ++k) {
        if (z[b * K + k] > z[b * K + best]) best = k;
      }
      out.push_back(static_cast<int>(best));
    }
  }
  return out;
}

double evaluate(const NetworkGenome& genome, const Dataset& data) {
  if (data.size() == 0) throw InvalidInput("evaluation set is empty");
  const auto pred = predict(genome, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == data.labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double dataset_loss(const NetworkGenome& genome, const Dataset& data) {
  check_dataset(data);
  if (data.size() == 0) throw InvalidInput("dataset is empty");
  constexpr std::size_t kChunk = 250;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto eff = effective_params(genome, MaskMode::apply);
  double total = 0.0;
  for (std::size_t first = 0; first < data.size(); first += kChunk) {
    const std::size_t count = std::min(kChunk, data.size() - first);
    const Trace t = run_forward(genome, eff, data.gather(order, first, count));
    const std::span<const int> labels(data.labels.data() + first, count);
    check_labels(genome, t.act.front(), labels);
    total += cross_entropy(t.act.back(), labels, nullptr) * static_cast<double>(count);
  }
  return total / static_cast<double>(data.size());
}

}  // namespace synevo
