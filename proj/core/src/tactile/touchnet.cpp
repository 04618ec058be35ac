#include "objf/tactile/touchnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "objf/common/error.hpp"
#include "objf/common/log.hpp"
#include "objf/common/rng.hpp"
#include "objf/nn/train.hpp"

namespace objf {

namespace {

// The network is a truncated signed-distance field over 3D points near the
// surface: positive outside, negative inside, zero on the surface, saturating
// at +-1 one truncation distance away. Every rendered pixel ray supervises the
// field at several points, and rays from different contacts that cross the
// same region agree by construction, which is what lets a few dozen contact
// windows train a field that reconstructs contacts it never saw.
constexpr int kFieldFreqs = 7;
const PosEncoding kFieldEnc{kFieldFreqs, true};
constexpr double kFieldTrunc = 0.001;

// Reconstruction searches for the field's surface crossing over a corridor
// extending slightly past the pad plane on one side and the press depth on
// the other; training supervises a margin beyond that corridor.
constexpr double kCorridorPad = 0.0004;
constexpr double kSamplePad = 0.0006;
constexpr double kDecodeStep = 0.0002;

// Coverage windows fill regions of the surface the dataset windows miss;
// they only need enough ray density to pin down local geometry.
constexpr int kCoverageStride = 2;

int field_input_dim() { return kFieldEnc.output_dim(3); }

struct PadFrame {
  Vec3 x, y, z, origin;
};

// Mirrors the renderer's pad frame at roll zero.
PadFrame pad_frame(const ContactSpec& spec) {
  PadFrame f;
  f.z = spec.normal();
  const Vec3 ref = std::abs(f.z.z()) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
  f.x = ref.cross(f.z).normalized();
  f.y = f.z.cross(f.x);
  f.origin = spec.location - spec.depth * f.z;
  return f;
}

// One shared isotropic scale keeps physical feature sizes meaning the same
// thing along every axis regardless of the object's aspect ratio.
struct FieldScale {
  Vec3 center = Vec3::Zero();
  double half_span = 1.0;
};

FieldScale field_scale(const Aabb& bounds) {
  FieldScale s;
  s.center = 0.5 * (bounds.b_min + bounds.b_max);
  s.half_span = std::max(0.5 * (bounds.b_max - bounds.b_min).maxCoeff(), 1e-9);
  return s;
}

Vec3 triangle_normal(const SurfaceMesh& mesh, int triangle) {
  const Vec3i tri = mesh.triangles[triangle];
  return (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
      .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]])
      .normalized();
}

void validate_fit_config(const TouchFitConfig& cfg) {
  if (cfg.num_contacts < 2) {
    throw Error(ErrorKind::Validation, "touchnet", "need at least 2 contacts to keep a held-out split");
  }
  if (cfg.map_size < 2) {
    throw Error(ErrorKind::Validation, "touchnet", "deformation map needs at least 2 pixels per side");
  }
  if (!(cfg.pixel_pitch > 0.0)) {
    throw Error(ErrorKind::Validation, "touchnet", "pixel pitch must be positive");
  }
  if (cfg.coverage_contacts < 0) {
    throw Error(ErrorKind::Validation, "touchnet", "coverage contact count cannot be negative");
  }
  if (cfg.hidden.empty()) {
    throw Error(ErrorKind::Validation, "touchnet", "need at least one hidden layer");
  }
  for (int width : cfg.hidden) {
    if (width < 1) throw Error(ErrorKind::Validation, "touchnet", "hidden layer widths must be positive");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw Error(ErrorKind::Validation, "touchnet", "learning rate must be positive");
  }
  if (cfg.batch_size < 1 || cfg.epochs < 1) {
    throw Error(ErrorKind::Validation, "touchnet", "batch size and epoch count must be positive");
  }
}

double map_mse(const DeformationMap& predicted, const DeformationMap& truth) {
  return (predicted.heights - truth.heights).squaredNorm() /
         static_cast<double>(truth.heights.size());
}

}  // namespace

std::vector<ContactSpec> sample_contact_specs(const Bvh& bvh, int count, uint64_t seed,
                                              int map_size, double pixel_pitch) {
  const SurfaceMesh& mesh = bvh.mesh();
  if (mesh.triangles.empty()) {
    throw Error(ErrorKind::Validation, "touchnet", "mesh has no triangles to touch");
  }
  if (count < 1) {
    throw Error(ErrorKind::Validation, "touchnet", "contact count must be positive");
  }

  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec3i tri = mesh.triangles[t];
    const Vec3 e1 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
    const Vec3 e2 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
    total += 0.5 * e1.cross(e2).norm();
    cumulative[t] = total;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::Validation, "touchnet", "mesh has zero surface area");
  }

  const double cos_cone = std::cos(kMaxContactAngleDeg * std::numbers::pi / 180.0);
  Rng rng(seed, 0x70C4);
  std::vector<ContactSpec> specs;
  specs.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const int t = static_cast<int>(std::min<size_t>(it - cumulative.begin(), cumulative.size() - 1));
    const Vec3i tri = mesh.triangles[t];

    const double su = std::sqrt(rng.uniform());
    const double v = rng.uniform();
    const Vec3 location = (1.0 - su) * mesh.vertices[tri[0]] +
                          su * (1.0 - v) * mesh.vertices[tri[1]] + su * v * mesh.vertices[tri[2]];

    const Vec3 n = triangle_normal(mesh, t);
    const Vec3 ref = std::abs(n.z()) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
    const Vec3 t1 = ref.cross(n).normalized();
    const Vec3 t2 = n.cross(t1);
    const double cos_tilt = 1.0 - rng.uniform() * (1.0 - cos_cone);
    const double sin_tilt = std::sqrt(std::max(0.0, 1.0 - cos_tilt * cos_tilt));
    const double azimuth = 2.0 * std::numbers::pi * rng.uniform();
    const Vec3 dir =
        cos_tilt * n + sin_tilt * (std::cos(azimuth) * t1 + std::sin(azimuth) * t2);

    ContactSpec spec;
    spec.location = location;
    spec.theta = std::acos(std::clamp(dir.z(), -1.0, 1.0));
    spec.phi = std::atan2(dir.y(), dir.x());
    spec.depth = kMinPressDepth + rng.uniform() * (kMaxPressDepth - kMinPressDepth);
    spec.map_size = map_size;
    spec.pixel_pitch = pixel_pitch;
    specs.push_back(spec);
  }
  return specs;
}

TouchNetModel fit_touchnet(const SurfaceMesh& mesh, const TouchFitConfig& cfg) {
  validate_fit_config(cfg);
  const Bvh bvh(mesh);

  const std::vector<ContactSpec> specs =
      sample_contact_specs(bvh, cfg.num_contacts, cfg.seed, cfg.map_size, cfg.pixel_pitch);
  std::vector<DeformationMap> maps;
  maps.reserve(specs.size());
  for (const ContactSpec& spec : specs) maps.push_back(render_deformation_map(bvh, spec));

  // Split whole contacts, not pixels: a held-out contact shares no samples
  // with training, so its reconstruction measures generalization.
  const int num_held = std::max(1, cfg.num_contacts / 10);
  std::vector<int> order(specs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(cfg.seed, 0x7E1D);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[split_rng.uniform_index(i)]);
  }
  std::vector<bool> held(specs.size(), false);
  for (int i = 0; i < num_held; ++i) held[order[i]] = true;
  const int num_train = cfg.num_contacts - num_held;

  TouchNetModel model;
  model.bounds = aabb_of(mesh);
  model.data.min_depth = kMinPressDepth;
  model.data.max_depth = kMaxPressDepth;
  model.data.max_angle_deg = kMaxContactAngleDeg;
  model.data.map_size = cfg.map_size;
  model.data.pixel_pitch = cfg.pixel_pitch;
  model.dataset_pixels =
      static_cast<int64_t>(cfg.num_contacts) * cfg.map_size * cfg.map_size;

  // Supervision pool: the training split plus extra coverage windows drawn
  // from the same placement distribution on a separate stream. Held-out
  // contacts stay out of this pool.
  std::vector<ContactSpec> sup;
  sup.reserve(static_cast<size_t>(num_train) + static_cast<size_t>(cfg.coverage_contacts));
  for (size_t i = 0; i < specs.size(); ++i) {
    if (!held[i]) sup.push_back(specs[i]);
  }
  if (cfg.coverage_contacts > 0) {
    const std::vector<ContactSpec> coverage = sample_contact_specs(
        bvh, cfg.coverage_contacts, hash_combine_u64(cfg.seed, 0xA496), cfg.map_size,
        cfg.pixel_pitch);
    sup.insert(sup.end(), coverage.begin(), coverage.end());
  }

  const FieldScale scale = field_scale(model.bounds);
  const double probe_floor = -(kFieldTrunc + 2.0 * kCorridorPad);
  const double offsets[5] = {0.0, -0.4 * kFieldTrunc, 0.4 * kFieldTrunc, -kFieldTrunc,
                             kFieldTrunc};

  std::vector<float> points;
  std::vector<float> targets_raw;
  points.reserve((static_cast<size_t>(num_train) * cfg.map_size * cfg.map_size +
                  static_cast<size_t>(cfg.coverage_contacts) * cfg.map_size * cfg.map_size / 4) *
                 8 * 3);
  const auto push_sample = [&](const Vec3& p, double sign) {
    points.push_back(static_cast<float>((p.x() - scale.center.x()) / scale.half_span));
    points.push_back(static_cast<float>((p.y() - scale.center.y()) / scale.half_span));
    points.push_back(static_cast<float>((p.z() - scale.center.z()) / scale.half_span));
    const ClosestPoint cp = bvh.closest_point(p);
    targets_raw.push_back(
        static_cast<float>(sign * std::min(cp.distance, kFieldTrunc) / kFieldTrunc));
    // The foot of a near-surface sample is an exact on-surface zero; these
    // anchor walls seen only edge-on by the rays that pass beside them.
    if (cp.distance > 1e-7 && cp.distance < kFieldTrunc) {
      points.push_back(static_cast<float>((cp.point.x() - scale.center.x()) / scale.half_span));
      points.push_back(static_cast<float>((cp.point.y() - scale.center.y()) / scale.half_span));
      points.push_back(static_cast<float>((cp.point.z() - scale.center.z()) / scale.half_span));
      targets_raw.push_back(0.0f);
    }
  };

  for (size_t i = 0; i < sup.size(); ++i) {
    const ContactSpec& s = sup[i];
    const PadFrame f = pad_frame(s);
    const double altitude = bvh.bounds().diagonal() + s.depth + 2.0 * kContactSnapDistance;
    const double s_top = s.depth + kSamplePad;
    const double s_bot = -kCorridorPad;
    const int stride = i < static_cast<size_t>(num_train) ? 1 : kCoverageStride;
    for (int r = 0; r < cfg.map_size; r += stride) {
      const double v = (r + 0.5 - cfg.map_size / 2.0) * s.pixel_pitch;
      for (int c = 0; c < cfg.map_size; c += stride) {
        const double u = (c + 0.5 - cfg.map_size / 2.0) * s.pixel_pitch;
        const Vec3 q = f.origin + u * f.x + v * f.y;
        const Vec3 start = q + altitude * f.z;
        const auto hit = bvh.raycast(start, -f.z, 1e-9, altitude - probe_floor);
        if (hit) {
          const double eta = (hit->point - f.origin).dot(f.z);
          for (double d : offsets) push_sample(q + (eta + d) * f.z, d >= 0.0 ? 1.0 : -1.0);
          push_sample(q + s_top * f.z, s_top >= eta ? 1.0 : -1.0);
          push_sample(q + s_bot * f.z, s_bot >= eta ? 1.0 : -1.0);
        } else {
          // A deep miss certifies the whole corridor on this ray is outside.
          push_sample(q + s_bot * f.z, 1.0);
          push_sample(q + 0.5 * s.depth * f.z, 1.0);
          push_sample(q + s_top * f.z, 1.0);
        }
      }
    }
  }

  const Eigen::Index num_samples = static_cast<Eigen::Index>(targets_raw.size());
  const Eigen::Map<Eigen::MatrixXf> raw_points(points.data(), 3, num_samples);
  const Eigen::Map<Eigen::MatrixXf> targets(targets_raw.data(), 1, num_samples);

  std::vector<int> dims;
  dims.push_back(field_input_dim());
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(1);
  model.data.net = make_mlp<float>(dims, hash_combine_u64(cfg.seed, 0x70C4E7));
  // Zero output layer: training starts from the all-zero field instead of
  // initialization noise.
  model.data.net.weights.back().setZero();

  // Coarse-to-fine frequency schedule: early phases see only low-frequency
  // bands, so surface regions the windows cover thinly settle on the smooth
  // extension of their surroundings before detail sharpens.
  const int band_limit[3] = {4, 6, kFieldFreqs};
  const double rates[3] = {cfg.learning_rate, cfg.learning_rate * 0.3, cfg.learning_rate * 0.1};
  const int phase_epochs[3] = {cfg.epochs, std::max(1, cfg.epochs / 2), std::max(1, cfg.epochs / 2)};
  double final_loss = 0.0;
  for (int phase = 0; phase < 3; ++phase) {
    Eigen::MatrixXf inputs = encode_positional_batch(Eigen::MatrixXf(raw_points), kFieldEnc);
    const int keep = std::min(band_limit[phase], kFieldFreqs);
    if (keep < kFieldFreqs) {
      inputs.bottomRows(static_cast<Eigen::Index>(6) * (kFieldFreqs - keep)).setZero();
    }
    TrainConfig tc;
    tc.learning_rate = rates[phase];
    tc.batch_size = cfg.batch_size;
    tc.epochs = phase_epochs[phase];
    tc.seed = hash_combine_u64(cfg.seed, 30 + phase);
    tc.threads = cfg.threads;
    const TrainResult result = mlp_train(model.data.net, inputs, targets, tc);
    final_loss = result.loss_history.back();
  }
  if (!std::isfinite(final_loss) || final_loss > 1e6) {
    throw Error(ErrorKind::Numerical, "touchnet",
                "training diverged, final loss " + std::to_string(final_loss));
  }

  double train_sse = 0.0;
  double held_sse = 0.0;
  int64_t train_px = 0;
  int64_t held_px = 0;
  for (size_t i = 0; i < specs.size(); ++i) {
    const DeformationMap predicted = touchnet_eval(model.data, model.bounds, specs[i]);
    const double sse = map_mse(predicted, maps[i]) * static_cast<double>(maps[i].heights.size());
    if (held[i]) {
      held_sse += sse;
      held_px += maps[i].heights.size();
    } else {
      train_sse += sse;
      train_px += maps[i].heights.size();
    }
  }
  const auto pooled_psnr = [](double sse, int64_t px) {
    if (px == 0) return 0.0;
    const double mse = sse / static_cast<double>(px);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(kMaxPressDepth * kMaxPressDepth / mse);
  };
  model.train_psnr = pooled_psnr(train_sse, train_px);
  model.held_out_psnr = pooled_psnr(held_sse, held_px);

  log_info("touchnet", "fit " + std::to_string(num_train) + "+" + std::to_string(num_held) +
                           " contacts, train " + std::to_string(model.train_psnr) + " dB, held-out " +
                           std::to_string(model.held_out_psnr) + " dB");
  return model;
}

DeformationMap touchnet_eval(const TouchNetData& data, const Aabb& bounds, const ContactSpec& spec) {
  if (data.net.num_layers() == 0 || data.net.input_dim() != field_input_dim() ||
      data.net.output_dim() != 1) {
    throw Error(ErrorKind::Validation, "touchnet", "touch network has an unexpected shape");
  }
  if (!bounds.valid()) {
    throw Error(ErrorKind::Validation, "touchnet", "object bounds are empty");
  }
  if (!(spec.depth >= data.min_depth && spec.depth <= data.max_depth)) {
    throw Error(ErrorKind::Validation, "touchnet",
                "pressing depth " + std::to_string(spec.depth) + " m is outside the trained range [" +
                    std::to_string(data.min_depth) + ", " + std::to_string(data.max_depth) + "]");
  }
  if (spec.map_size != data.map_size ||
      std::abs(spec.pixel_pitch - data.pixel_pitch) > 1e-12) {
    throw Error(ErrorKind::Validation, "touchnet",
                "pad geometry differs from the trained sensor (" + std::to_string(data.map_size) +
                    " px at " + std::to_string(data.pixel_pitch) + " m per pixel)");
  }

  const FieldScale scale = field_scale(bounds);
  const PadFrame f = pad_frame(spec);
  const int n = spec.map_size;
  const double s_hi = spec.depth + kCorridorPad;
  const double s_lo = -kCorridorPad;
  const int n_steps = static_cast<int>(std::ceil((s_hi - s_lo) / kDecodeStep)) + 1;
  const Eigen::Index n_px = static_cast<Eigen::Index>(n) * n;

  Eigen::MatrixXf sample_pts(3, n_px * n_steps);
  Eigen::Index col = 0;
  for (int r = 0; r < n; ++r) {
    const double v = (r + 0.5 - n / 2.0) * spec.pixel_pitch;
    for (int c = 0; c < n; ++c) {
      const double u = (c + 0.5 - n / 2.0) * spec.pixel_pitch;
      const Vec3 q = f.origin + u * f.x + v * f.y;
      for (int k = 0; k < n_steps; ++k, ++col) {
        const Vec3 p = q + (s_hi - k * kDecodeStep) * f.z;
        sample_pts(0, col) = static_cast<float>((p.x() - scale.center.x()) / scale.half_span);
        sample_pts(1, col) = static_cast<float>((p.y() - scale.center.y()) / scale.half_span);
        sample_pts(2, col) = static_cast<float>((p.z() - scale.center.z()) / scale.half_span);
      }
    }
  }
  const Eigen::MatrixXf values =
      data.net.forward_batch(encode_positional_batch(sample_pts, kFieldEnc));

  // March each ray from the far end of the corridor toward the pad plane and
  // take the first positive-to-nonpositive crossing, matching the renderer's
  // first-hit rule; interpolate, then refine once with an extra field read.
  DeformationMap map;
  map.heights.resize(n, n);
  map.mask.resize(n, n);
  map.depth = spec.depth;
  map.pixel_pitch = spec.pixel_pitch;

  std::vector<double> bracket_hi_s(n_px), bracket_lo_s(n_px), bracket_hi_v(n_px),
      bracket_lo_v(n_px);
  std::vector<char> crossed(n_px, 0);
  Eigen::MatrixXd eta_hat(n, n);
  col = 0;
  for (Eigen::Index px = 0; px < n_px; ++px) {
    const int r = static_cast<int>(px / n);
    const int c = static_cast<int>(px % n);
    double eta = -1.0;  // below the corridor: no contact after clamping
    if (values(0, col) <= 0.0f) {
      eta = spec.depth;  // inside through the whole corridor: full press
    } else {
      for (int k = 0; k + 1 < n_steps; ++k) {
        const double va = values(0, col + k);
        const double vb = values(0, col + k + 1);
        if (va > 0.0 && vb <= 0.0) {
          const double sa = s_hi - k * kDecodeStep;
          const double sb = s_hi - (k + 1) * kDecodeStep;
          eta = sa - va * (sa - sb) / (va - vb);
          bracket_hi_s[px] = sa;
          bracket_lo_s[px] = sb;
          bracket_hi_v[px] = va;
          bracket_lo_v[px] = vb;
          crossed[px] = 1;
          break;
        }
      }
    }
    eta_hat(r, c) = eta;
    col += n_steps;
  }

  std::vector<Eigen::Index> refine_px;
  Eigen::MatrixXf refine_pts(3, n_px);
  Eigen::Index m = 0;
  for (Eigen::Index px = 0; px < n_px; ++px) {
    if (!crossed[px]) continue;
    const int r = static_cast<int>(px / n);
    const int c = static_cast<int>(px % n);
    const double v = (r + 0.5 - n / 2.0) * spec.pixel_pitch;
    const double u = (c + 0.5 - n / 2.0) * spec.pixel_pitch;
    const Vec3 p = f.origin + u * f.x + v * f.y + eta_hat(r, c) * f.z;
    refine_pts(0, m) = static_cast<float>((p.x() - scale.center.x()) / scale.half_span);
    refine_pts(1, m) = static_cast<float>((p.y() - scale.center.y()) / scale.half_span);
    refine_pts(2, m) = static_cast<float>((p.z() - scale.center.z()) / scale.half_span);
    refine_px.push_back(px);
    ++m;
  }
  if (m > 0) {
    const Eigen::MatrixXf refined = data.net.forward_batch(
        encode_positional_batch(Eigen::MatrixXf(refine_pts.leftCols(m)), kFieldEnc));
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index px = refine_px[j];
      const int r = static_cast<int>(px / n);
      const int c = static_cast<int>(px % n);
      const double sm = eta_hat(r, c);
      const double vm = refined(0, j);
      double sa = bracket_hi_s[px];
      double va = bracket_hi_v[px];
      double sb = bracket_lo_s[px];
      double vb = bracket_lo_v[px];
      if (vm > 0.0) {
        sa = sm;
        va = vm;
      } else {
        sb = sm;
        vb = vm;
      }
      if (va > 0.0 && vb <= 0.0 && va != vb) {
        eta_hat(r, c) = sa - va * (sa - sb) / (va - vb);
      }
    }
  }

  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double h = std::clamp(eta_hat(r, c), 0.0, spec.depth);
      map.heights(r, c) = h;
      map.mask(r, c) = h > 1e-5;
    }
  }
  return map;
}

DeformationMap touchnet_eval(const TouchNetModel& model, const ContactSpec& spec) {
  return touchnet_eval(model.data, model.bounds, spec);
}

TouchNetModel touchnet_from_object(const ObjectFile& object) {
  if (!object.touch.has_value()) {
    throw Error(ErrorKind::Validation, "touchnet", "object file has no touch section");
  }
  TouchNetModel model;
  model.data = *object.touch;
  model.bounds = object.bounds;
  return model;
}

}  // namespace objf
