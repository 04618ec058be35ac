#include "objf/audio/audionet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "objf/common/error.hpp"
#include "objf/common/log.hpp"
#include "objf/nn/train.hpp"

namespace objf {

namespace {

constexpr const char* kModule = "audionet";

Eigen::Vector3f normalize_position(const Vec3& p, const Aabb& bounds) {
  Eigen::Vector3f out;
  for (int a = 0; a < 3; ++a) {
    const double extent = bounds.b_max[a] - bounds.b_min[a];
    out[a] = extent > 1e-12
                 ? static_cast<float>(2.0 * (p[a] - bounds.b_min[a]) / extent - 1.0)
                 : 0.0f;
  }
  return out;
}

PosEncoding encoding_for(const Mlp& branch) {
  const int in = branch.input_dim();
  require(in % 3 == 0 && ((in / 3) - 1) % 2 == 0, ErrorKind::Validation, kModule,
          "branch input dim is not a positional encoding of a 3D point");
  return PosEncoding{((in / 3) - 1) / 2, true};
}

// Relative gain error over a vertex subset: summed prediction-error norms
// against summed true-gain norms, which stays meaningful even when single
// gain rows vanish.
double gain_error(const AudioNetModel& net, const ModalModel& model,
                  const std::vector<int>& order, const std::vector<Eigen::Index>& subset,
                  const Eigen::MatrixXf& encoded) {
  const Mlp* branches[3] = {&net.data.branch_x, &net.data.branch_y, &net.data.branch_z};
  const Eigen::ArrayXd mean = net.data.gain_mean.array();
  const Eigen::ArrayXd scale = net.data.gain_scale.array();

  double err_sum = 0.0;
  double truth_sum = 0.0;
  for (const Eigen::Index pos : subset) {
    const Eigen::VectorXf enc = encoded.col(pos);
    const int v = order[pos];
    for (int a = 0; a < 3; ++a) {
      const Eigen::VectorXd pred =
          (branches[a]->forward(enc).cast<double>().array() * scale + mean).matrix();
      const Eigen::VectorXd truth = model.gains.row(3 * v + a).transpose();
      err_sum += (pred - truth).norm();
      truth_sum += truth.norm();
    }
  }
  return err_sum / (truth_sum + 1e-12);
}

}  // namespace

AudioNetModel fit_audionet(const ModalModel& model, const TetMesh& mesh,
                           const AudioFitConfig& cfg) {
  const Eigen::Index num_vertices = static_cast<Eigen::Index>(mesh.vertex_count());
  require(num_vertices >= 2, ErrorKind::InvalidArgument, kModule,
          "mesh must have at least two vertices");
  require(model.num_vertices == num_vertices, ErrorKind::InvalidArgument, kModule,
          "modal model and mesh vertex counts differ");
  const int num_modes = model.num_modes();
  require(num_modes > 0, ErrorKind::InvalidArgument, kModule, "modal model has no modes");
  require(cfg.encoding_frequencies >= 0, ErrorKind::InvalidArgument, kModule,
          "encoding frequency count must be non-negative");

  // Canonical dataset order: vertices sorted by coordinate. Training then
  // depends only on the point set, not on the mesh's vertex numbering.
  std::vector<int> order(num_vertices);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Vec3& pa = mesh.vertices[a];
    const Vec3& pb = mesh.vertices[b];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return pa.z() < pb.z();
  });

  AudioNetModel net;
  for (const Vec3& v : mesh.vertices) net.bounds.expand(v);
  net.data.omega_hz = model.omega_hz;
  net.data.damping = model.damping;

  // Per-mode standardization over all gain entries, so every mode carries
  // comparable weight in the loss regardless of its physical magnitude.
  net.data.gain_mean.resize(num_modes);
  net.data.gain_scale.resize(num_modes);
  for (int i = 0; i < num_modes; ++i) {
    const Eigen::VectorXd col = model.gains.col(i).cast<double>();
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(col.size());
    net.data.gain_mean[i] = mean;
    net.data.gain_scale[i] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  net.data.vertices.resize(num_vertices);
  for (Eigen::Index i = 0; i < num_vertices; ++i)
    net.data.vertices[i] = mesh.vertices[order[i]].cast<float>();

  // Seeded held-out selection over canonical positions; the training subset
  // keeps canonical order.
  const Eigen::Index held_count = std::max<Eigen::Index>(1, num_vertices / 10);
  std::vector<Eigen::Index> positions(num_vertices);
  std::iota(positions.begin(), positions.end(), 0);
  Rng split_rng(cfg.seed, 0xE1D0);
  for (Eigen::Index i = num_vertices - 1; i > 0; --i) {
    const Eigen::Index j = static_cast<Eigen::Index>(split_rng.uniform_index(i + 1));
    std::swap(positions[i], positions[j]);
  }
  std::vector<bool> held_mask(num_vertices, false);
  for (Eigen::Index i = 0; i < held_count; ++i) held_mask[positions[i]] = true;

  std::vector<Eigen::Index> train_set, held_set;
  for (Eigen::Index i = 0; i < num_vertices; ++i)
    (held_mask[i] ? held_set : train_set).push_back(i);

  const PosEncoding enc{cfg.encoding_frequencies, true};
  Eigen::MatrixXf coords(3, num_vertices);
  for (Eigen::Index i = 0; i < num_vertices; ++i)
    coords.col(i) = normalize_position(mesh.vertices[order[i]], net.bounds);
  const Eigen::MatrixXf encoded = encode_positional_batch(coords, enc);

  Eigen::MatrixXf train_inputs(encoded.rows(), train_set.size());
  for (size_t i = 0; i < train_set.size(); ++i) train_inputs.col(i) = encoded.col(train_set[i]);

  std::vector<int> dims;
  dims.push_back(static_cast<int>(encoded.rows()));
  for (int h : cfg.hidden) dims.push_back(h);
  dims.push_back(num_modes);

  Mlp* branches[3] = {&net.data.branch_x, &net.data.branch_y, &net.data.branch_z};
  for (int a = 0; a < 3; ++a) {
    Eigen::MatrixXf targets(num_modes, train_set.size());
    for (size_t i = 0; i < train_set.size(); ++i) {
      const int v = order[train_set[i]];
      targets.col(i) = ((model.gains.row(3 * v + a).transpose().cast<double>().array() -
                         net.data.gain_mean.array()) /
                        net.data.gain_scale.array())
                           .cast<float>();
    }

    *branches[a] = make_mlp<float>(dims, hash_combine_u64(cfg.seed, 10 + a));
    // Zero output layer: the branch starts as the zero function, so hidden
    // feature directions the training set never constrains stay silent
    // instead of bleeding initialization noise into held-out predictions.
    branches[a]->weights.back().setZero();

    // Main run plus two fine-tune phases at decayed step sizes; each phase
    // gets enough budget to settle the previous phase's optimizer wobble,
    // which the decay then shrinks by the same factor.
    const double rates[3] = {cfg.learning_rate, cfg.learning_rate * 0.2,
                             cfg.learning_rate * 0.04};
    const int phase_epochs[3] = {cfg.epochs, std::max(1, cfg.epochs / 2),
                                 std::max(1, cfg.epochs / 2)};
    for (int phase = 0; phase < 3; ++phase) {
      TrainConfig tc;
      tc.learning_rate = rates[phase];
      tc.batch_size = cfg.batch_size;
      tc.epochs = phase_epochs[phase];
      tc.seed = hash_combine_u64(cfg.seed, 20 + 10 * phase + a);
      tc.threads = cfg.threads;
      const TrainResult result = mlp_train<float>(*branches[a], train_inputs, targets, tc);
      if (!result.loss_history.empty()) {
        const double final_loss = result.loss_history.back();
        require(final_loss < 1e6, ErrorKind::Numerical, kModule,
                "training diverged on axis " + std::to_string(a) + " (final loss " +
                    std::to_string(final_loss) + ")");
      }
    }
  }

  net.train_error = gain_error(net, model, order, train_set, encoded);
  net.held_out_error = gain_error(net, model, order, held_set, encoded);
  log_info("fit_audionet: mean relative gain error ", net.train_error, " (train) / ",
           net.held_out_error, " (held-out, ", held_set.size(), " of ", num_vertices,
           " vertices)");
  return net;
}

Eigen::Matrix3Xd predict_gains(const AudioNetModel& net, const Vec3& position) {
  require(net.bounds.contains(position), ErrorKind::Validation, kModule,
          "position outside the encoded bounds");
  const Mlp* branches[3] = {&net.data.branch_x, &net.data.branch_y, &net.data.branch_z};
  const PosEncoding enc = encoding_for(net.data.branch_x);
  require(net.data.branch_y.input_dim() == net.data.branch_x.input_dim() &&
              net.data.branch_z.input_dim() == net.data.branch_x.input_dim(),
          ErrorKind::Validation, kModule, "branches disagree on input dim");

  const Eigen::VectorXf encoded =
      encode_positional(Eigen::VectorXf(normalize_position(position, net.bounds)), enc);
  Eigen::Matrix3Xd gains(3, net.data.omega_hz.size());
  for (int a = 0; a < 3; ++a) {
    gains.row(a) = (branches[a]->forward(encoded).cast<double>().array() *
                        net.data.gain_scale.array() +
                    net.data.gain_mean.array())
                       .transpose();
  }
  return gains;
}

Waveform render_audio(const AudioNetModel& net, const Vec3& position, const Vec3& direction,
                      double magnitude, double duration, double sample_rate) {
  require(std::abs(direction.norm() - 1.0) <= 1e-6, ErrorKind::Validation, kModule,
          "force direction must be unit length");
  require(magnitude >= 0.0, ErrorKind::Validation, kModule,
          "force magnitude must be non-negative");
  require(net.data.omega_hz.size() > 0, ErrorKind::Validation, kModule,
          "audio model has no modes");

  const Eigen::Matrix3Xd axis_gains = predict_gains(net, position);
  const Vec3 k = magnitude * direction;
  const Eigen::VectorXd gains =
      (k.x() * axis_gains.row(0) + k.y() * axis_gains.row(1) + k.z() * axis_gains.row(2))
          .transpose();
  return synthesize_modes(gains, net.data.omega_hz, net.data.damping, duration, sample_rate);
}

AudioNetModel audionet_from_object(const ObjectFile& object) {
  require(object.audio.has_value(), ErrorKind::Validation, kModule,
          "object file has no audio section");
  AudioNetModel net;
  net.data = *object.audio;
  net.bounds = object.bounds;
  return net;
}

}  // namespace objf
