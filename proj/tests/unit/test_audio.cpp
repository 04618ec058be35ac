#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "objf/audio/features.hpp"
#include "objf/audio/synth.hpp"
#include "objf/audio/wav.hpp"
#include "objf/common/error.hpp"
#include "objf/common/rng.hpp"
#include "test_util.hpp"

using namespace objf;

namespace {

ModalModel two_mode_model() {
  ModalModel model;
  model.num_vertices = 2;
  model.omega_hz.resize(2);
  model.omega_hz << 441.0, 1377.5;
  model.damping.resize(2);
  model.damping << 12.0, 35.0;
  model.gains.resize(6, 2);
  model.gains << 0.9, -0.4, 0.1, 0.7, -0.3, 0.2, 1.2, 0.5, -0.8, 0.6, 0.25, -1.1;
  return model;
}

ModalModel single_mode_model(double freq_hz, double damping) {
  ModalModel model;
  model.num_vertices = 1;
  model.omega_hz.resize(1);
  model.omega_hz << freq_hz;
  model.damping.resize(1);
  model.damping << damping;
  model.gains.resize(3, 1);
  model.gains << 1.0, 0.0, 0.0;
  return model;
}

Waveform sine_wave(double freq, double seconds, double sr) {
  Waveform w;
  w.sample_rate = sr;
  w.duration = seconds;
  w.samples.resize(std::lround(seconds * sr));
  for (Eigen::Index i = 0; i < w.samples.size(); ++i)
    w.samples[i] = std::sin(2.0 * M_PI * freq * i / sr);
  return w;
}

}  // namespace

TEST_CASE("contact validation rejects malformed forces") {
  const ModalModel model = two_mode_model();
  ContactForce contact;
  contact.vertex = 5;
  CHECK_THROWS_AS(synthesize(model, contact, 0.1, 8000.0), Error);
  contact.vertex = 0;
  contact.direction = Vec3(1.0, 1.0, 0.0);
  CHECK_THROWS_AS(synthesize(model, contact, 0.1, 8000.0), Error);
  contact.direction = Vec3(0, 0, 1);
  contact.magnitude = -2.0;
  CHECK_THROWS_AS(synthesize(model, contact, 0.1, 8000.0), Error);

  ModalModel empty;
  CHECK_THROWS_AS(synthesize(empty, ContactForce{}, 0.1, 8000.0), Error);
}

TEST_CASE("zero magnitude produces silence") {
  ContactForce contact;
  contact.magnitude = 0.0;
  const Waveform w = synthesize(two_mode_model(), contact, 0.25, 44100.0);
  CHECK(w.samples.size() == std::lround(0.25 * 44100.0));
  CHECK(w.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a single undamped mode is a pure sine") {
  const ModalModel model = single_mode_model(441.0, 0.0);
  ContactForce contact;
  contact.vertex = 0;
  contact.direction = Vec3(1, 0, 0);
  contact.magnitude = 1.0;
  const Waveform w = synthesize(model, contact, 0.1, 44100.0);
  CHECK(w.samples[0] == 0.0);
  CHECK(w.samples[25] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.samples[50] == doctest::Approx(std::sin(M_PI)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("synthesis matches the direct closed form") {
  const ModalModel model = two_mode_model();
  ContactForce contact;
  contact.vertex = 1;
  contact.direction = Vec3(0.2, -0.4, 0.6).normalized();
  contact.magnitude = 2.5;
  const double sr = 44100.0;
  const Waveform w = synthesize(model, contact, 0.5, sr);

  // Independent per-sample evaluation of the damped-sinusoid sum.
  const Vec3 k = contact.magnitude * contact.direction;
  double peak = 0.0, worst = 0.0;
  for (Eigen::Index n = 0; n < w.samples.size(); ++n) {
    const double t = static_cast<double>(n) / sr;
    double expected = 0.0;
    for (int m = 0; m < model.num_modes(); ++m) {
      const double gain = k.x() * model.gains(3 * contact.vertex + 0, m) +
                          k.y() * model.gains(3 * contact.vertex + 1, m) +
                          k.z() * model.gains(3 * contact.vertex + 2, m);
      expected += gain * std::exp(-model.damping[m] * t) *
                  std::sin(2.0 * M_PI * model.omega_hz[m] * t);
    }
    peak = std::max(peak, std::abs(expected));
    worst = std::max(worst, std::abs(expected - w.samples[n]));
  }
  CHECK(worst <= 1e-9 * std::max(1.0, peak));
}

TEST_CASE("synthesis is exactly linear in magnitude") {
  const ModalModel model = two_mode_model();
  ContactForce contact;
  contact.vertex = 0;
  contact.direction = Vec3(0.48, 0.6, 0.64).normalized();
  contact.magnitude = 0.7;
  const Waveform base = synthesize(model, contact, 0.2, 22050.0);
  contact.magnitude = 1.4;
  const Waveform doubled = synthesize(model, contact, 0.2, 22050.0);
  for (Eigen::Index i = 0; i < base.samples.size(); ++i)
    CHECK(doubled.samples[i] == 2.0 * base.samples[i]);
}

TEST_CASE("synthesis superposes across force axes") {
  const ModalModel model = two_mode_model();
  const Vec3 dir = Vec3(0.3, -0.5, 0.81).normalized();
  const double mag = 1.8;
  ContactForce contact{0, dir, mag};
  const Waveform combined = synthesize(model, contact, 0.2, 22050.0);

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(combined.samples.size());
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 e = Vec3::Zero();
    e[axis] = dir[axis] >= 0.0 ? 1.0 : -1.0;
    ContactForce part{0, e, mag * std::abs(dir[axis])};
    sum += synthesize(model, part, 0.2, 22050.0).samples;
  }
  const double peak = combined.samples.cwiseAbs().maxCoeff();
  CHECK((combined.samples - sum).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, peak));
}

TEST_CASE("modes above Nyquist are dropped") {
  ModalModel model = two_mode_model();
  model.omega_hz[1] = 9000.0;  // above Nyquist at 16 kHz
  ContactForce contact;
  contact.vertex = 0;
  const Waveform w = synthesize(model, contact, 0.1, 16000.0);

  const ModalModel low = single_mode_model(441.0, 12.0);
  ModalModel low_matched = low;
  low_matched.gains(0, 0) = model.gains(2, 0);  // z-axis gain of vertex 0
  ContactForce x_hit{0, Vec3(1, 0, 0), 1.0};
  const Waveform ref = synthesize(low_matched, x_hit, 0.1, 16000.0);
  CHECK((w.samples - ref.samples).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("single-mode decay envelope matches the damping rate") {
  const double d = 30.0;
  const ModalModel model = single_mode_model(500.0, d);
  ContactForce contact;
  contact.vertex = 0;
  contact.direction = Vec3(1, 0, 0);
  const double sr = 44100.0;
  const Waveform w = synthesize(model, contact, 1.0, sr);
  const Eigen::VectorXd env = envelope(w);

  // Least-squares slope of log(envelope) against frame time, windows chosen
  // away from the attack and the noise floor.
  const double frame_dt = 256.0 / sr;
  const int first = static_cast<int>(0.1 / frame_dt);
  const int last = static_cast<int>(0.9 / frame_dt);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int f = first; f <= last; ++f) {
    const double x = f * frame_dt;
    const double y = std::log(env[f]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-d).epsilon(0.02));
}

TEST_CASE("modal frequencies appear as spectrogram peaks") {
  const ModalModel model = two_mode_model();
  ContactForce contact;
  contact.vertex = 0;
  contact.direction = Vec3(1, 0, 0);
  ModalModel undamped = model;
  undamped.damping << 2.0, 2.0;
  const Waveform w = synthesize(undamped, contact, 1.0, 44100.0);
  const Spectrogram spec = stft(w);

  const Eigen::VectorXd mean_mag = spec.magnitudes.colwise().mean();
  for (int m = 0; m < undamped.num_modes(); ++m) {
    const int bin = static_cast<int>(std::lround(undamped.omega_hz[m] * spec.window / 44100.0));
    double local_peak = 0.0;
    int local_arg = -1;
    for (int k = std::max(0, bin - 3); k <= std::min(spec.bins() - 1, bin + 3); ++k) {
      if (mean_mag[k] > local_peak) {
        local_peak = mean_mag[k];
        local_arg = k;
      }
    }
    CHECK(std::abs(local_arg - bin) <= 1);
    CHECK(local_peak > 10.0 * mean_mag[bin + 20]);
  }
}

TEST_CASE("pure sine stft peaks at the expected bin in every frame") {
  const Waveform w = sine_wave(441.0, 0.3, 44100.0);
  const Spectrogram spec = stft(w);
  REQUIRE(spec.bins() == 513);
  const int expected_bin = static_cast<int>(std::lround(441.0 * 1024.0 / 44100.0));
  CHECK(expected_bin == 10);
  for (int f = 0; f < spec.frames(); ++f) {
    int arg = 0;
    spec.magnitudes.row(f).maxCoeff(&arg);
    CHECK(arg == expected_bin);
  }
}

TEST_CASE("silence maps to zero or constant features") {
  Waveform silent;
  silent.sample_rate = 44100.0;
  silent.duration = 0.2;
  silent.samples = Eigen::VectorXd::Zero(8820);

  CHECK(spectral_features(silent, FeatureKind::Stft).cwiseAbs().maxCoeff() == 0.0);
  CHECK(spectral_features(silent, FeatureKind::Envelope).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd cep = spectral_features(silent, FeatureKind::Mfcc);
  const double c0 = 40.0 * std::log(1e-10);
  for (Eigen::Index f = 0; f < cep.rows(); ++f) {
    CHECK(cep(f, 0) == doctest::Approx(c0).epsilon(1e-9));
    for (Eigen::Index c = 1; c < cep.cols(); ++c)
      CHECK(std::abs(cep(f, c)) <= 1e-9 * std::abs(c0));
  }
}

TEST_CASE("envelope frames take the max magnitude") {
  Waveform w;
  w.sample_rate = 44100.0;
  w.samples = Eigen::VectorXd::Zero(600);
  w.duration = 600.0 / 44100.0;
  w.samples[10] = -0.75;
  w.samples[300] = 0.5;
  w.samples[599] = -0.25;
  const Eigen::VectorXd env = envelope(w);
  REQUIRE(env.size() == 3);  // 256 + 256 + 88 samples
  CHECK(env[0] == 0.75);
  CHECK(env[1] == 0.5);
  CHECK(env[2] == 0.25);
}

TEST_CASE("mfcc matches an independent filterbank and dct") {
  Waveform w;
  const double sr = 44100.0;
  w.sample_rate = sr;
  w.duration = 0.2;
  w.samples.resize(8820);
  for (Eigen::Index i = 0; i < w.samples.size(); ++i) {
    const double t = i / sr;
    w.samples[i] = 0.8 * std::sin(2.0 * M_PI * 600.0 * t) +
                   0.45 * std::sin(2.0 * M_PI * 2200.0 * t + 0.3);
  }
  const Eigen::MatrixXd got = mfcc(w);

  // Reference path: naive DFT, triangular mel filterbank, log, DCT-II, all
  // written out longhand.
  const int window = 1024, hop = 256, bins = 513, bands = 40;
  const int frames = static_cast<int>((w.samples.size() - window) / hop) + 1;
  REQUIRE(got.rows() == frames);
  REQUIRE(got.cols() == 13);

  auto hz_to_mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto mel_to_hz = [](double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); };
  std::vector<double> edge_hz(bands + 2);
  for (int m = 0; m < bands + 2; ++m)
    edge_hz[m] = mel_to_hz(hz_to_mel(sr / 2.0) * m / (bands + 1));

  for (int f = 0; f < frames; f += 7) {
    std::vector<double> power(bins);
    for (int k = 0; k < bins; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (int i = 0; i < window; ++i) {
        const double hann = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / window));
        const double sample = w.samples[f * hop + i] * hann;
        const double phase = -2.0 * M_PI * k * i / window;
        acc += sample * std::complex<double>(std::cos(phase), std::sin(phase));
      }
      power[k] = std::norm(acc);
    }
    for (int c = 0; c < 13; ++c) {
      double coeff = 0.0;
      for (int m = 0; m < bands; ++m) {
        double energy = 0.0;
        for (int k = 0; k < bins; ++k) {
          const double hz = k * sr / window;
          double weight = 0.0;
          if (hz > edge_hz[m] && hz < edge_hz[m + 2]) {
            weight = hz <= edge_hz[m + 1]
                         ? (hz - edge_hz[m]) / (edge_hz[m + 1] - edge_hz[m])
                         : (edge_hz[m + 2] - hz) / (edge_hz[m + 2] - edge_hz[m + 1]);
          }
          energy += weight * power[k];
        }
        coeff += std::log(1e-10 + energy) * std::cos(M_PI * c * (m + 0.5) / bands);
      }
      CHECK(got(f, c) == doctest::Approx(coeff).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("audio distance is an rms metric over features") {
  const Waveform sine = sine_wave(441.0, 0.3, 44100.0);
  Waveform silent = sine;
  silent.samples.setZero();

  CHECK(audio_distance(sine, sine, DistanceKind::Stft) == 0.0);
  CHECK(audio_distance(sine, sine, DistanceKind::Envelope) == 0.0);

  const double ab = audio_distance(sine, silent, DistanceKind::Stft);
  const double ba = audio_distance(silent, sine, DistanceKind::Stft);
  CHECK(ab == ba);

  const Eigen::MatrixXd features = spectral_features(sine, FeatureKind::Stft);
  const double rms = std::sqrt(features.squaredNorm() / features.size());
  CHECK(ab == doctest::Approx(rms).epsilon(1e-12));

  Waveform longer = sine_wave(441.0, 0.4, 44100.0);
  CHECK_THROWS_AS(audio_distance(sine, longer, DistanceKind::Stft), Error);
  Waveform other_rate = sine;
  other_rate.sample_rate = 22050.0;
  CHECK_THROWS_AS(audio_distance(sine, other_rate, DistanceKind::Stft), Error);
}

TEST_CASE("wav files roundtrip at 16-bit precision") {
  testutil::TempDir dir("wav");

  Waveform zeros;
  zeros.sample_rate = 44100.0;
  zeros.duration = 1.0;
  zeros.samples = Eigen::VectorXd::Zero(44100);
  const std::string zero_path = dir.file("zeros.wav");
  write_wav(zero_path, zeros);
  CHECK(std::filesystem::file_size(zero_path) == 44 + 88200);

  const Waveform sine = sine_wave(441.0, 0.25, 44100.0);
  const std::string sine_path = dir.file("sine.wav");
  write_wav(sine_path, sine);
  const Waveform back = read_wav(sine_path);
  REQUIRE(back.samples.size() == sine.samples.size());
  CHECK(back.sample_rate == 44100.0);

  // Peak normalization to 0.9 full scale: the loudest PCM value must be
  // round(0.9 * 32767) and every sample within one quantization step.
  int32_t peak_pcm = 0;
  {
    std::ifstream in(sine_path, std::ios::binary);
    in.seekg(44);
    std::vector<int16_t> pcm(sine.samples.size());
    in.read(reinterpret_cast<char*>(pcm.data()), pcm.size() * 2);
    for (int16_t v : pcm) peak_pcm = std::max<int32_t>(peak_pcm, std::abs(v));
  }
  CHECK(peak_pcm == 29490);

  const double scale = 0.9 / sine.samples.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < sine.samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - sine.samples[i] * scale) <= 1.0 / 32767.0);

  Waveform bad = sine;
  bad.samples[3] = std::nan("");
  CHECK_THROWS_AS(write_wav(dir.file("bad.wav"), bad), Error);

  {
    std::ofstream out(dir.file("trunc.wav"), std::ios::binary);
    out.write("RIFF\x10\0\0\0WAVEfmt ", 16);
  }
  CHECK_THROWS_AS(read_wav(dir.file("trunc.wav")), Error);
}

TEST_CASE("feature csv export writes one frame per row") {
  testutil::TempDir dir("csv");
  Eigen::MatrixXd features(2, 3);
  features << 1.5, -2.0, 0.25, 4.0, 5.5, -6.75;
  const std::string path = dir.file("features.csv");
  write_features_csv(path, features);

  std::ifstream in(path);
  std::string line1, line2, extra;
  REQUIRE(static_cast<bool>(std::getline(in, line1)));
  REQUIRE(static_cast<bool>(std::getline(in, line2)));
  CHECK_FALSE(static_cast<bool>(std::getline(in, extra)));
  CHECK(line1 == "1.5,-2,0.25");
  CHECK(line2 == "4,5.5,-6.75");
}
