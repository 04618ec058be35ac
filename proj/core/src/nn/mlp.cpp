#include "objf/nn/mlp.hpp"

#include <cmath>

#include "objf/common/error.hpp"

namespace objf {

namespace {
constexpr const char* kModule = "implicit_core";

template <typename S>
void check_shape(const MlpT<S>& net) {
  require(net.dims.size() >= 2, ErrorKind::InvalidArgument, kModule,
          "network needs at least input and output dims");
  require(net.weights.size() == net.dims.size() - 1 && net.biases.size() == net.weights.size(),
          ErrorKind::InvalidArgument, kModule, "layer count does not match dims");
  for (size_t l = 0; l < net.weights.size(); ++l) {
    require(net.weights[l].rows() == net.dims[l + 1] && net.weights[l].cols() == net.dims[l] &&
                net.biases[l].size() == net.dims[l + 1],
            ErrorKind::InvalidArgument, kModule, "layer shape does not match dims");
  }
}
}  // namespace

template <typename S>
size_t MlpT<S>::parameter_count() const {
  size_t count = 0;
  for (size_t l = 0; l + 1 < dims.size(); ++l)
    count += static_cast<size_t>(dims[l] + 1) * dims[l + 1];
  return count;
}

template <typename S>
bool MlpT<S>::finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

template <typename S>
typename MlpT<S>::Vector MlpT<S>::forward(const Vector& x) const {
  check_shape(*this);
  require(x.size() == input_dim(), ErrorKind::InvalidArgument, kModule,
          "input has dim " + std::to_string(x.size()) + ", network expects " +
              std::to_string(input_dim()));
  Vector a = x;
  for (int l = 0; l < num_layers(); ++l) {
    a = (weights[l] * a + biases[l]).eval();
    if (l + 1 < num_layers()) a = a.cwiseMax(S(0));
  }
  return a;
}

template <typename S>
typename MlpT<S>::Matrix MlpT<S>::forward_batch(const Matrix& x) const {
  check_shape(*this);
  require(x.rows() == input_dim(), ErrorKind::InvalidArgument, kModule,
          "batch input has dim " + std::to_string(x.rows()) + ", network expects " +
              std::to_string(input_dim()));
  Matrix a = x;
  for (int l = 0; l < num_layers(); ++l) {
    a = ((weights[l] * a).colwise() + biases[l]).eval();
    if (l + 1 < num_layers()) a = a.cwiseMax(S(0));
  }
  return a;
}

template <typename S>
MlpT<S> make_mlp(const std::vector<int>& dims, uint64_t seed) {
  require(dims.size() >= 2, ErrorKind::InvalidArgument, kModule,
          "network needs at least input and output dims");
  for (int d : dims)
    require(d > 0, ErrorKind::InvalidArgument, kModule, "layer dims must be positive");

  MlpT<S> net;
  net.dims = dims;
  Rng rng(seed, 0x4A11);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const double stddev = std::sqrt(2.0 / dims[l]);
    typename MlpT<S>::Matrix w(dims[l + 1], dims[l]);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = static_cast<S>(rng.normal(0.0, stddev));
    net.weights.push_back(std::move(w));
    net.biases.push_back(MlpT<S>::Vector::Zero(dims[l + 1]));
  }
  return net;
}

template <typename S>
MlpT<S> make_zero_mlp(const std::vector<int>& dims) {
  require(dims.size() >= 2, ErrorKind::InvalidArgument, kModule,
          "network needs at least input and output dims");
  MlpT<S> net;
  net.dims = dims;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    net.weights.push_back(MlpT<S>::Matrix::Zero(dims[l + 1], dims[l]));
    net.biases.push_back(MlpT<S>::Vector::Zero(dims[l + 1]));
  }
  return net;
}

MlpT<double> widen(const Mlp& net) {
  MlpT<double> out;
  out.dims = net.dims;
  for (const auto& w : net.weights) out.weights.push_back(w.cast<double>());
  for (const auto& b : net.biases) out.biases.push_back(b.cast<double>());
  return out;
}

Mlp narrow(const MlpT<double>& net) {
  Mlp out;
  out.dims = net.dims;
  for (const auto& w : net.weights) out.weights.push_back(w.cast<float>());
  for (const auto& b : net.biases) out.biases.push_back(b.cast<float>());
  return out;
}

namespace {

template <typename Vec>
Vec encode_impl(const Vec& x, const PosEncoding& enc) {
  using Scalar = typename Vec::Scalar;
  const int d = static_cast<int>(x.size());
  Vec out(enc.output_dim(d));
  int at = 0;
  if (enc.include_input) {
    out.segment(0, d) = x;
    at = d;
  }
  double freq = M_PI;
  for (int k = 0; k < enc.num_frequencies; ++k) {
    for (int i = 0; i < d; ++i)
      out[at + i] = static_cast<Scalar>(std::sin(freq * static_cast<double>(x[i])));
    for (int i = 0; i < d; ++i)
      out[at + d + i] = static_cast<Scalar>(std::cos(freq * static_cast<double>(x[i])));
    at += 2 * d;
    freq *= 2.0;
  }
  return out;
}

}  // namespace

Eigen::VectorXf encode_positional(const Eigen::VectorXf& x, const PosEncoding& enc) {
  return encode_impl(x, enc);
}

Eigen::VectorXd encode_positional(const Eigen::VectorXd& x, const PosEncoding& enc) {
  return encode_impl(x, enc);
}

Eigen::MatrixXf encode_positional_batch(const Eigen::MatrixXf& x, const PosEncoding& enc) {
  const int d = static_cast<int>(x.rows());
  Eigen::MatrixXf out(enc.output_dim(d), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    out.col(c) = encode_impl(Eigen::VectorXf(x.col(c)), enc);
  return out;
}

template struct MlpT<float>;
template struct MlpT<double>;
template MlpT<float> make_mlp<float>(const std::vector<int>&, uint64_t);
template MlpT<double> make_mlp<double>(const std::vector<int>&, uint64_t);
template MlpT<float> make_zero_mlp<float>(const std::vector<int>&);
template MlpT<double> make_zero_mlp<double>(const std::vector<int>&);

}  // namespace objf
