#include "objf/audio/features.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <complex>
#include <fstream>
#include <vector>

#include "objf/common/error.hpp"

namespace objf {

namespace {

constexpr const char* kModule = "audio_synth";

double mel_of_hz(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double hz_of_mel(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

Spectrogram stft(const Waveform& w, int window, int hop) {
  require(window > 0 && hop > 0, ErrorKind::InvalidArgument, kModule,
          "window and hop must be positive");
  require(w.samples.size() >= window, ErrorKind::Validation, kModule,
          "waveform shorter than the analysis window (" + std::to_string(w.samples.size()) +
              " < " + std::to_string(window) + " samples)");

  const int num_frames = static_cast<int>((w.samples.size() - window) / hop) + 1;
  const int bins = window / 2 + 1;

  Eigen::VectorXd hann(window);
  for (int i = 0; i < window; ++i)
    hann[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / window));

  Spectrogram spec;
  spec.window = window;
  spec.hop = hop;
  spec.sample_rate = w.sample_rate;
  spec.magnitudes.resize(num_frames, bins);

  Eigen::FFT<double> fft;
  std::vector<double> frame(window);
  std::vector<std::complex<double>> out(window);
  for (int f = 0; f < num_frames; ++f) {
    const long start = static_cast<long>(f) * hop;
    for (int i = 0; i < window; ++i) frame[i] = w.samples[start + i] * hann[i];
    fft.fwd(out, frame);
    for (int k = 0; k < bins; ++k) spec.magnitudes(f, k) = std::abs(out[k]);
  }
  return spec;
}

Eigen::VectorXd envelope(const Waveform& w, int frame) {
  require(frame > 0, ErrorKind::InvalidArgument, kModule, "frame size must be positive");
  require(w.samples.size() > 0, ErrorKind::Validation, kModule, "empty waveform");
  const long n = w.samples.size();
  const long num_frames = (n + frame - 1) / frame;
  Eigen::VectorXd env(num_frames);
  for (long f = 0; f < num_frames; ++f) {
    const long begin = f * frame;
    const long len = std::min<long>(frame, n - begin);
    env[f] = w.samples.segment(begin, len).cwiseAbs().maxCoeff();
  }
  return env;
}

Eigen::MatrixXd mfcc(const Waveform& w) {
  const Spectrogram spec = stft(w);
  const int bins = spec.bins();
  constexpr int kMelBands = 40;
  constexpr int kCoeffs = 13;

  // Triangular filters with unit peaks, mel-spaced edges from 0 to Nyquist.
  const double mel_max = mel_of_hz(spec.sample_rate / 2.0);
  std::vector<double> edges(kMelBands + 2);
  for (int m = 0; m < kMelBands + 2; ++m)
    edges[m] = hz_of_mel(mel_max * m / (kMelBands + 1));

  Eigen::MatrixXd filters = Eigen::MatrixXd::Zero(kMelBands, bins);
  for (int m = 0; m < kMelBands; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double hz = k * spec.sample_rate / spec.window;
      double weight = 0.0;
      if (hz > lo && hz < hi)
        weight = hz <= mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
      filters(m, k) = weight;
    }
  }

  Eigen::MatrixXd coeffs(spec.frames(), kCoeffs);
  for (int f = 0; f < spec.frames(); ++f) {
    const Eigen::VectorXd power = spec.magnitudes.row(f).transpose().array().square();
    const Eigen::VectorXd energy = filters * power;
    Eigen::VectorXd logs(kMelBands);
    for (int m = 0; m < kMelBands; ++m) logs[m] = std::log(1e-10 + energy[m]);
    for (int c = 0; c < kCoeffs; ++c) {
      double acc = 0.0;
      for (int m = 0; m < kMelBands; ++m)
        acc += logs[m] * std::cos(M_PI * c * (m + 0.5) / kMelBands);
      coeffs(f, c) = acc;
    }
  }
  return coeffs;
}

Eigen::MatrixXd spectral_features(const Waveform& w, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Stft:
      return stft(w).magnitudes;
    case FeatureKind::Envelope:
      return envelope(w);
    case FeatureKind::Mfcc:
      return mfcc(w);
  }
  raise(ErrorKind::InvalidArgument, kModule, "unknown feature kind");
}

double audio_distance(const Waveform& a, const Waveform& b, DistanceKind kind) {
  require(a.sample_rate == b.sample_rate, ErrorKind::Validation, kModule,
          "waveform sample rates differ");
  require(a.samples.size() == b.samples.size(), ErrorKind::Validation, kModule,
          "waveform lengths differ");
  const FeatureKind fk =
      kind == DistanceKind::Stft ? FeatureKind::Stft : FeatureKind::Envelope;
  const Eigen::MatrixXd fa = spectral_features(a, fk);
  const Eigen::MatrixXd fb = spectral_features(b, fk);
  require(fa.rows() == fb.rows() && fa.cols() == fb.cols(), ErrorKind::Validation, kModule,
          "feature shapes differ");
  return std::sqrt((fa - fb).squaredNorm() / static_cast<double>(fa.size()));
}

void write_features_csv(const std::string& path, const Eigen::MatrixXd& features) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, kModule, "cannot open '" + path + "' for writing");
  out.precision(17);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      if (c) out << ',';
      out << features(r, c);
    }
    out << '\n';
  }
  require(out.good(), ErrorKind::Io, kModule, "failed writing '" + path + "'");
}

}  // namespace objf
