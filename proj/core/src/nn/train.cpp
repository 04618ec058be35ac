#include "objf/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "objf/common/error.hpp"
#include "objf/common/parallel.hpp"

namespace objf {

namespace {

constexpr const char* kModule = "implicit_core";
// The batch is always reduced over this fixed chunk grid in index order, so
// gradients are bitwise independent of the worker-thread count.
constexpr int kGradChunks = 64;

template <typename S>
struct ChunkPartial {
  double loss = 0.0;
  std::vector<typename MlpT<S>::Matrix> grad_w;
  std::vector<typename MlpT<S>::Vector> grad_b;
};

// Forward + backward for one contiguous column range. Loss and gradient are
// scaled by the full-batch element count so partials sum to the batch mean.
template <typename S>
void chunk_loss_grad(const MlpT<S>& net, const typename MlpT<S>::Matrix& inputs,
                     const typename MlpT<S>::Matrix& targets, Eigen::Index begin,
                     Eigen::Index count, double inv_elements, bool want_grad,
                     ChunkPartial<S>& out) {
  using Matrix = typename MlpT<S>::Matrix;
  const int layers = net.num_layers();

  std::vector<Matrix> acts(layers + 1);
  acts[0] = inputs.middleCols(begin, count);
  for (int l = 0; l < layers; ++l) {
    acts[l + 1] = ((net.weights[l] * acts[l]).colwise() + net.biases[l]).eval();
    if (l + 1 < layers) acts[l + 1] = acts[l + 1].cwiseMax(S(0));
  }

  const Matrix diff = acts[layers] - targets.middleCols(begin, count);
  out.loss = static_cast<double>(diff.squaredNorm()) * inv_elements;
  if (!want_grad) return;

  out.grad_w.resize(layers);
  out.grad_b.resize(layers);
  Matrix delta = diff * static_cast<S>(2.0 * inv_elements);
  for (int l = layers - 1; l >= 0; --l) {
    out.grad_w[l] = delta * acts[l].transpose();
    out.grad_b[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (net.weights[l].transpose() * delta).eval();
      delta = delta.cwiseProduct((acts[l].array() > S(0)).template cast<S>().matrix());
    }
  }
}

}  // namespace

template <typename S>
double mlp_loss_and_gradient(const MlpT<S>& net, const typename MlpT<S>::Matrix& inputs,
                             const typename MlpT<S>::Matrix& targets, int threads,
                             MlpGradient<S>* gradient) {
  require(inputs.cols() == targets.cols() && inputs.cols() > 0, ErrorKind::InvalidArgument,
          kModule, "batch inputs and targets must have matching nonzero sample counts");
  require(inputs.rows() == net.input_dim() && targets.rows() == net.output_dim(),
          ErrorKind::InvalidArgument, kModule, "batch dims do not match the network");

  const Eigen::Index n = inputs.cols();
  const double inv_elements = 1.0 / (static_cast<double>(n) * net.output_dim());
  const bool want_grad = gradient != nullptr;
  const int layers = net.num_layers();

  if (want_grad) {
    gradient->weights.assign(layers, Eigen::MatrixXd());
    gradient->biases.assign(layers, Eigen::VectorXd());
    for (int l = 0; l < layers; ++l) {
      gradient->weights[l] = Eigen::MatrixXd::Zero(net.dims[l + 1], net.dims[l]);
      gradient->biases[l] = Eigen::VectorXd::Zero(net.dims[l + 1]);
    }
  }

  // Fixed ceil-balanced chunk grid over the batch.
  const Eigen::Index base = n / kGradChunks;
  const Eigen::Index rem = n % kGradChunks;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
  Eigen::Index at = 0;
  for (int c = 0; c < kGradChunks && at < n; ++c) {
    const Eigen::Index len = base + (c < rem ? 1 : 0);
    if (len == 0) continue;
    ranges.emplace_back(at, len);
    at += len;
  }

  const int workers = std::max(1, std::min<int>(resolve_threads(threads),
                                                static_cast<int>(ranges.size())));
  double total_loss = 0.0;
  std::vector<ChunkPartial<S>> partials(workers);

  // Chunks run in waves of `workers`; partials fold back strictly in chunk
  // order, which keeps the reduction independent of the thread count.
  for (size_t wave = 0; wave < ranges.size(); wave += workers) {
    const int active = static_cast<int>(std::min<size_t>(workers, ranges.size() - wave));
    auto run = [&](int slot) {
      const auto& range = ranges[wave + slot];
      chunk_loss_grad(net, inputs, targets, range.first, range.second, inv_elements,
                      want_grad, partials[slot]);
    };
    if (active == 1) {
      run(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(active);
      for (int t = 0; t < active; ++t) pool.emplace_back(run, t);
      for (auto& th : pool) th.join();
    }
    for (int t = 0; t < active; ++t) {
      total_loss += partials[t].loss;
      if (want_grad) {
        for (int l = 0; l < layers; ++l) {
          gradient->weights[l] += partials[t].grad_w[l].template cast<double>();
          gradient->biases[l] += partials[t].grad_b[l].template cast<double>();
        }
      }
    }
  }
  return total_loss;
}

template <typename S>
TrainResult mlp_train(MlpT<S>& net, const typename MlpT<S>::Matrix& inputs,
                      const typename MlpT<S>::Matrix& targets, const TrainConfig& cfg) {
  require(inputs.cols() == targets.cols() && inputs.cols() > 0, ErrorKind::InvalidArgument,
          kModule, "training set must be nonempty with matching sample counts");
  require(inputs.rows() == net.input_dim() && targets.rows() == net.output_dim(),
          ErrorKind::InvalidArgument, kModule, "dataset dims do not match the network");
  require(cfg.batch_size > 0 && cfg.epochs >= 0, ErrorKind::InvalidArgument, kModule,
          "batch size must be positive and epochs non-negative");

  const Eigen::Index n = inputs.cols();
  const int layers = net.num_layers();

  // Adam state in double precision.
  std::vector<Eigen::MatrixXd> m_w(layers), v_w(layers);
  std::vector<Eigen::VectorXd> m_b(layers), v_b(layers);
  for (int l = 0; l < layers; ++l) {
    m_w[l] = Eigen::MatrixXd::Zero(net.dims[l + 1], net.dims[l]);
    v_w[l] = m_w[l];
    m_b[l] = Eigen::VectorXd::Zero(net.dims[l + 1]);
    v_b[l] = m_b[l];
  }
  long step = 0;

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.loss_history.reserve(cfg.epochs);
  typename MlpT<S>::Matrix batch_in, batch_tg;
  MlpGradient<S> grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      Rng rng(cfg.seed, 1000 + static_cast<uint64_t>(epoch));
      for (Eigen::Index i = n - 1; i > 0; --i) {
        const Eigen::Index j = static_cast<Eigen::Index>(rng.uniform_index(i + 1));
        std::swap(order[i], order[j]);
      }
    }

    double epoch_loss = 0.0;
    int batch_index = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const Eigen::Index count = std::min<Eigen::Index>(cfg.batch_size, n - start);
      batch_in.resize(inputs.rows(), count);
      batch_tg.resize(targets.rows(), count);
      for (Eigen::Index i = 0; i < count; ++i) {
        batch_in.col(i) = inputs.col(order[start + i]);
        batch_tg.col(i) = targets.col(order[start + i]);
      }

      const double loss =
          mlp_loss_and_gradient(net, batch_in, batch_tg, cfg.threads, &grad);
      if (!std::isfinite(loss)) {
        raise(ErrorKind::Numerical, kModule,
              "loss is not finite at epoch " + std::to_string(epoch) + ", batch " +
                  std::to_string(batch_index));
      }
      epoch_loss += loss * static_cast<double>(count);

      ++step;
      const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (int l = 0; l < layers; ++l) {
        m_w[l] = cfg.beta1 * m_w[l] + (1.0 - cfg.beta1) * grad.weights[l];
        v_w[l] = cfg.beta2 * v_w[l] + (1.0 - cfg.beta2) * grad.weights[l].cwiseAbs2();
        m_b[l] = cfg.beta1 * m_b[l] + (1.0 - cfg.beta1) * grad.biases[l];
        v_b[l] = cfg.beta2 * v_b[l] + (1.0 - cfg.beta2) * grad.biases[l].cwiseAbs2();

        const Eigen::MatrixXd upd_w =
            (m_w[l] / bias1).array() / ((v_w[l] / bias2).array().sqrt() + cfg.adam_eps);
        const Eigen::VectorXd upd_b =
            (m_b[l] / bias1).array() / ((v_b[l] / bias2).array().sqrt() + cfg.adam_eps);
        net.weights[l] =
            (net.weights[l].template cast<double>() - cfg.learning_rate * upd_w)
                .template cast<S>();
        net.biases[l] = (net.biases[l].template cast<double>() - cfg.learning_rate * upd_b)
                            .template cast<S>();
      }
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

template double mlp_loss_and_gradient<float>(const MlpT<float>&, const Eigen::MatrixXf&,
                                             const Eigen::MatrixXf&, int,
                                             MlpGradient<float>*);
template double mlp_loss_and_gradient<double>(const MlpT<double>&, const Eigen::MatrixXd&,
                                              const Eigen::MatrixXd&, int,
                                              MlpGradient<double>*);
template TrainResult mlp_train<float>(MlpT<float>&, const Eigen::MatrixXf&,
                                      const Eigen::MatrixXf&, const TrainConfig&);
template TrainResult mlp_train<double>(MlpT<double>&, const Eigen::MatrixXd&,
                                       const Eigen::MatrixXd&, const TrainConfig&);

}  // namespace objf
