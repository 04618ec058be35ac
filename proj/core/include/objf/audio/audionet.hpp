#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "objf/audio/synth.hpp"
#include "objf/fem/modal.hpp"
#include "objf/geometry/voxelize.hpp"
#include "objf/nn/object_file.hpp"

namespace objf {

struct AudioFitConfig {
  std::vector<int> hidden = {256, 256, 256, 256, 256, 256, 256, 256};
  int encoding_frequencies = 10;  // per coordinate axis
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 150;
  uint64_t seed = 0;
  int threads = 0;
};

// Learned vertex→gain encoder together with the box it normalizes
// coordinates into. The underlying section data is what gets serialized.
struct AudioNetModel {
  AudioNetData data;
  Aabb bounds;
  double train_error = 0.0;     // mean relative gain error, training split
  double held_out_error = 0.0;  // same metric on the held-out split
};

// Trains the three per-axis gain branches on (vertex coordinate → gain row)
// pairs drawn from every tet vertex, with a seeded 10% held-out split.
// Dataset order is canonicalized before batching, so a permuted mesh trains
// to identical parameters.
AudioNetModel fit_audionet(const ModalModel& model, const TetMesh& mesh,
                           const AudioFitConfig& cfg = {});

// Per-mode gains for a unit force along each axis at the given position.
// Row a holds the gains excited by a unit force along axis a.
Eigen::Matrix3Xd predict_gains(const AudioNetModel& net, const Vec3& position);

// Impulse response at an arbitrary in-bounds position: gains predicted by the
// branches, combined along the force direction, then synthesized with the
// stored frequencies and dampings.
Waveform render_audio(const AudioNetModel& net, const Vec3& position, const Vec3& direction,
                      double magnitude, double duration = 3.0, double sample_rate = 44100.0);

// Extracts the audio section of a loaded container; throws if absent.
AudioNetModel audionet_from_object(const ObjectFile& object);

}  // namespace objf
