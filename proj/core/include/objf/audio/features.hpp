#pragma once

#include <Eigen/Core>
#include <string>

#include "objf/audio/synth.hpp"

namespace objf {

struct Spectrogram {
  Eigen::MatrixXd magnitudes;  // frames x bins, linear scale
  int window = 1024;
  int hop = 256;
  double sample_rate = 44100.0;

  int frames() const { return static_cast<int>(magnitudes.rows()); }
  int bins() const { return static_cast<int>(magnitudes.cols()); }  // window/2 + 1
};

// Magnitude spectrogram with a periodic Hann window.
Spectrogram stft(const Waveform& w, int window = 1024, int hop = 256);

// Max-abs over consecutive 256-sample frames (final partial frame included).
Eigen::VectorXd envelope(const Waveform& w, int frame = 256);

// 13 cepstral coefficients per frame: 40-band mel filterbank on the power
// spectrum, log(1e-10 + energy), then DCT-II.
Eigen::MatrixXd mfcc(const Waveform& w);

enum class FeatureKind { Stft, Envelope, Mfcc };
Eigen::MatrixXd spectral_features(const Waveform& w, FeatureKind kind);

enum class DistanceKind { Stft, Envelope };

// Root-mean-square difference over the corresponding feature matrices, so the
// value does not grow with duration or resolution.
double audio_distance(const Waveform& a, const Waveform& b, DistanceKind kind);

// Feature matrix as CSV, one frame per row.
void write_features_csv(const std::string& path, const Eigen::MatrixXd& features);

}  // namespace objf
