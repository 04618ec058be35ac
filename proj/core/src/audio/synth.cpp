#include "objf/audio/synth.hpp"

#include <cmath>
#include <vector>

#include "objf/common/error.hpp"
#include "objf/common/log.hpp"

namespace objf {

namespace {
constexpr const char* kModule = "audio_synth";
constexpr double kTwoPi = 6.283185307179586476925286766559;
// The per-sample rotation recurrence is re-anchored to the closed form this
// often, which keeps accumulated rounding far below the 1e-9 contract.
constexpr int kResyncInterval = 4096;
}  // namespace

void validate_contact(const ContactForce& contact, int num_vertices) {
  require(contact.vertex >= 0 && contact.vertex < num_vertices, ErrorKind::InvalidArgument,
          kModule,
          "contact vertex " + std::to_string(contact.vertex) + " out of range (mesh has " +
              std::to_string(num_vertices) + " vertices)");
  require(std::abs(contact.direction.norm() - 1.0) <= 1e-6, ErrorKind::Validation, kModule,
          "contact direction must be unit length");
  require(contact.magnitude >= 0.0, ErrorKind::Validation, kModule,
          "contact magnitude must be non-negative");
}

Eigen::VectorXd contact_gains(const ModalModel& model, const ContactForce& contact) {
  validate_contact(contact, model.num_vertices);
  const Vec3 k = contact.magnitude * contact.direction;
  const int base = 3 * contact.vertex;
  return (k.x() * model.gains.row(base + 0) + k.y() * model.gains.row(base + 1) +
          k.z() * model.gains.row(base + 2))
      .transpose();
}

Waveform synthesize(const ModalModel& model, const ContactForce& contact, double duration,
                    double sample_rate) {
  require(model.num_modes() > 0, ErrorKind::Validation, kModule, "modal model has no modes");
  const Eigen::VectorXd all_gains = contact_gains(model, contact);
  return synthesize_modes(all_gains, model.omega_hz, model.damping, duration, sample_rate);
}

Waveform synthesize_modes(const Eigen::VectorXd& all_gains, const Eigen::VectorXd& omega_hz,
                          const Eigen::VectorXd& damping, double duration,
                          double sample_rate) {
  require(all_gains.size() == omega_hz.size() && all_gains.size() == damping.size(),
          ErrorKind::InvalidArgument, kModule, "gains, frequencies, and dampings must align");
  require(duration > 0.0, ErrorKind::InvalidArgument, kModule, "duration must be positive");
  require(sample_rate > 0.0, ErrorKind::InvalidArgument, kModule,
          "sample rate must be positive");

  const int num_modes = static_cast<int>(all_gains.size());
  const long num_samples = std::lround(duration * sample_rate);

  Waveform w;
  w.sample_rate = sample_rate;
  w.duration = duration;
  w.samples = Eigen::VectorXd::Zero(num_samples);
  if (num_modes == 0 || all_gains.cwiseAbs().maxCoeff() == 0.0) return w;

  // Keep modes below Nyquist only.
  std::vector<int> active;
  for (int i = 0; i < num_modes; ++i) {
    if (2.0 * omega_hz[i] < sample_rate) active.push_back(i);
  }
  const int dropped = num_modes - static_cast<int>(active.size());
  if (dropped > 0) {
    log_warn("synthesize: dropped ", dropped, " modes at or above Nyquist (sample rate ",
             sample_rate, " Hz)");
  }
  const int n = static_cast<int>(active.size());
  if (n == 0) return w;

  Eigen::ArrayXd gains(n), decay(n), omega(n);
  for (int i = 0; i < n; ++i) {
    gains[i] = all_gains[active[i]];
    decay[i] = damping[active[i]];
    omega[i] = kTwoPi * omega_hz[active[i]];
  }

  const double dt = 1.0 / sample_rate;
  const Eigen::ArrayXd damp_step = (-decay * dt).exp();
  const Eigen::ArrayXd step_re = damp_step * (omega * dt).cos();
  const Eigen::ArrayXd step_im = damp_step * (omega * dt).sin();

  Eigen::ArrayXd re(n), im(n), next_re(n);
  for (long s = 0; s < num_samples; ++s) {
    if (s % kResyncInterval == 0) {
      const double t = static_cast<double>(s) * dt;
      re = (-decay * t).exp() * (omega * t).cos();
      im = (-decay * t).exp() * (omega * t).sin();
    }
    w.samples[s] = (gains * im).sum();
    next_re = re * step_re - im * step_im;
    im = re * step_im + im * step_re;
    re = next_re;
  }
  return w;
}

}  // namespace objf
