#pragma once

#include <cstdint>
#include <vector>

#include "objf/nn/mlp.hpp"

namespace objf {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 100;
  uint64_t seed = 0;
  bool shuffle = true;
  int threads = 0;  // 0 = all hardware threads
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean MSE per epoch
};

template <typename S>
struct MlpGradient {
  std::vector<Eigen::MatrixXd> weights;  // accumulated in double regardless of S
  std::vector<Eigen::VectorXd> biases;
};

// Mean-squared-error loss over a batch (one sample per column) and its
// gradient. The batch is reduced over a fixed chunk grid in a fixed order, so
// the result does not depend on the number of worker threads.
template <typename S>
double mlp_loss_and_gradient(const MlpT<S>& net,
                             const typename MlpT<S>::Matrix& inputs,
                             const typename MlpT<S>::Matrix& targets, int threads,
                             MlpGradient<S>* gradient);

// Minibatch Adam on MSE. Deterministic given (net, dataset, cfg).
template <typename S>
TrainResult mlp_train(MlpT<S>& net, const typename MlpT<S>::Matrix& inputs,
                      const typename MlpT<S>::Matrix& targets, const TrainConfig& cfg);

}  // namespace objf
