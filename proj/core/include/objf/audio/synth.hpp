#pragma once

#include <Eigen/Core>

#include "objf/fem/modal.hpp"
#include "objf/geometry/mesh.hpp"

namespace objf {

struct ContactForce {
  int vertex = 0;
  Vec3 direction = Vec3(0, 0, 1);  // unit length
  double magnitude = 1.0;          // Newtons
};

void validate_contact(const ContactForce& contact, int num_vertices);

struct Waveform {
  Eigen::VectorXd samples;
  double sample_rate = 44100.0;
  double duration = 0.0;  // seconds; samples.size() == round(duration * sample_rate)
};

// Sum of damped sinusoids excited by an impulsive contact force. Modes at or
// above Nyquist are dropped with a warning.
Waveform synthesize(const ModalModel& model, const ContactForce& contact, double duration = 3.0,
                    double sample_rate = 44100.0);

// Same synthesis kernel fed with explicit per-mode amplitudes instead of a
// mesh contact; synthesize() and the learned-gain renderer both end here.
Waveform synthesize_modes(const Eigen::VectorXd& gains, const Eigen::VectorXd& omega_hz,
                          const Eigen::VectorXd& damping, double duration,
                          double sample_rate);

// Per-mode amplitudes for a contact: gain rows of the contact vertex combined
// along the force direction and scaled by magnitude.
Eigen::VectorXd contact_gains(const ModalModel& model, const ContactForce& contact);

}  // namespace objf
