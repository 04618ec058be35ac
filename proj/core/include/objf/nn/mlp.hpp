#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "objf/common/rng.hpp"

namespace objf {

// Fully-connected network, ReLU on hidden layers, linear output. Parameters
// are stored at the scalar precision S; the shipped networks use float, the
// double instantiation exists for gradient verification.
template <typename S>
struct MlpT {
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  std::vector<int> dims;         // input, hidden..., output
  std::vector<Matrix> weights;   // per layer, [out x in]
  std::vector<Vector> biases;

  int input_dim() const { return dims.empty() ? 0 : dims.front(); }
  int output_dim() const { return dims.empty() ? 0 : dims.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  size_t parameter_count() const;
  bool finite() const;

  Vector forward(const Vector& x) const;
  // Column-per-sample batch forward.
  Matrix forward_batch(const Matrix& x) const;
};

using Mlp = MlpT<float>;

// He-normal weights, zero biases, fully determined by the seed.
template <typename S>
MlpT<S> make_mlp(const std::vector<int>& dims, uint64_t seed);

// All-zero parameters with the given shape (also the canonical placeholder
// for unoccupied scene cells).
template <typename S>
MlpT<S> make_zero_mlp(const std::vector<int>& dims);

MlpT<double> widen(const Mlp& net);
Mlp narrow(const MlpT<double>& net);

struct PosEncoding {
  int num_frequencies = 0;  // L
  bool include_input = true;

  int output_dim(int input_dim) const {
    return input_dim * ((include_input ? 1 : 0) + 2 * num_frequencies);
  }
};

// [x?, sin(pi x), cos(pi x), sin(2 pi x), cos(2 pi x), ...] with each block
// applied elementwise across the input dimensions.
Eigen::VectorXf encode_positional(const Eigen::VectorXf& x, const PosEncoding& enc);
Eigen::VectorXd encode_positional(const Eigen::VectorXd& x, const PosEncoding& enc);

// Batch variant, one sample per column.
Eigen::MatrixXf encode_positional_batch(const Eigen::MatrixXf& x, const PosEncoding& enc);

}  // namespace objf
