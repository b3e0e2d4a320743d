#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "synevo/data.hpp"
#include "synevo/genome.hpp"
#include "synevo/tensor.hpp"

namespace synevo {

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 1;
  std::uint64_t seed = 1;
  // A batch loss above divergence_ratio * ln(classes), i.e. far worse than
  // uniform guessing, counts as divergence even while values stay finite.
  double divergence_ratio = 100.0;
};

void check_train_config(const TrainConfig& config);

enum class MaskMode : std::uint8_t { apply, ignore };

// Class probabilities (batch, classes). With MaskMode::ignore the raw
// weights are used as if every mask were 1.
Tensor forward(const NetworkGenome& genome, const Tensor& batch, MaskMode masks = MaskMode::apply);

struct GradientSet {
  std::vector<Tensor> weights;             // parallel to genome.layers; empty where no weights
  std::vector<std::vector<double>> bias;   // same
};

struct LossAndGradients {
  double loss = 0.0;  // mean softmax cross-entropy over the batch
  GradientSet gradients;
};

double loss(const NetworkGenome& genome, const Tensor& batch, std::span<const int> labels);
LossAndGradients backward(const NetworkGenome& genome, const Tensor& batch, std::span<const int> labels);

struct TrainResult {
  NetworkGenome genome;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;  // mean training loss per epoch
};

// Minibatch SGD with momentum. Masked weights receive zero gradient and
// never move. Throws TrainingDiverged naming the 1-based epoch.
TrainResult sgd_train(NetworkGenome genome, const Dataset& data, const TrainConfig& config);

// Argmax predictions; ties go to the lowest class index.
std::vector<int> predict(const NetworkGenome& genome, const Dataset& data);
double evaluate(const NetworkGenome& genome, const Dataset& data);
// Mean cross-entropy over the whole dataset, evaluated in chunks.
double dataset_loss(const NetworkGenome& genome, const Dataset& data);

}  // namespace synevo
