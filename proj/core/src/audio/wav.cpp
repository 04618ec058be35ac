#include "objf/audio/wav.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "objf/common/binary_io.hpp"
#include "objf/common/error.hpp"

namespace objf {

namespace {
constexpr const char* kModule = "audio_synth";
}

void write_wav(const std::string& path, const Waveform& w) {
  require(w.samples.allFinite(), ErrorKind::Validation, kModule,
          "waveform contains non-finite samples");
  require(w.sample_rate > 0.0, ErrorKind::Validation, kModule, "invalid sample rate");

  const double peak = w.samples.size() ? w.samples.cwiseAbs().maxCoeff() : 0.0;
  const double scale = peak < 1e-12 ? 0.0 : 0.9 / peak;

  std::vector<int16_t> pcm(w.samples.size());
  for (Eigen::Index i = 0; i < w.samples.size(); ++i) {
    pcm[i] = static_cast<int16_t>(std::lround(w.samples[i] * scale * 32767.0));
  }

  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, kModule, "cannot open '" + path + "' for writing");
  BinaryWriter writer(out);
  const uint32_t data_bytes = static_cast<uint32_t>(pcm.size() * 2);
  writer.write_magic("RIFF");
  writer.write_u32(36 + data_bytes);
  writer.write_magic("WAVE");
  writer.write_magic("fmt ");
  writer.write_u32(16);
  writer.write_u32(1u | (1u << 16));  // PCM format, mono (two u16 fields)
  writer.write_u32(static_cast<uint32_t>(std::lround(w.sample_rate)));
  writer.write_u32(static_cast<uint32_t>(std::lround(w.sample_rate)) * 2);
  writer.write_u32(2u | (16u << 16));  // block align 2, 16 bits (two u16 fields)
  writer.write_magic("data");
  writer.write_u32(data_bytes);
  if (!pcm.empty()) writer.write_bytes(pcm.data(), data_bytes);
  out.flush();
  require(out.good(), ErrorKind::Io, kModule, "failed writing '" + path + "'");
}

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, kModule, "cannot open '" + path + "'");
  BinaryReader reader(in, "wav file '" + path + "'");
  reader.expect_magic("RIFF");
  reader.read_u32();  // riff payload size; chunk sizes below are authoritative
  reader.expect_magic("WAVE");

  bool have_fmt = false;
  uint32_t sample_rate = 0;
  Waveform w;
  while (!reader.at_eof()) {
    char tag[4];
    reader.read_bytes(tag, 4);
    const uint32_t chunk_size = reader.read_u32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      require(chunk_size >= 16, ErrorKind::Parse, kModule, "fmt chunk too small");
      const uint32_t fmt_channels = reader.read_u32();
      sample_rate = reader.read_u32();
      reader.read_u32();  // byte rate
      const uint32_t align_bits = reader.read_u32();
      require((fmt_channels & 0xFFFF) == 1 && (fmt_channels >> 16) == 1, ErrorKind::Parse,
              kModule, "only mono PCM is supported");
      require((align_bits >> 16) == 16, ErrorKind::Parse, kModule,
              "only 16-bit samples are supported");
      for (uint32_t skip = 16; skip < chunk_size; ++skip) reader.read_u8();
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      require(have_fmt, ErrorKind::Parse, kModule, "data chunk before fmt chunk");
      require(chunk_size % 2 == 0, ErrorKind::Parse, kModule, "odd data chunk size");
      std::vector<int16_t> pcm(chunk_size / 2);
      if (!pcm.empty()) reader.read_bytes(pcm.data(), chunk_size);
      w.samples.resize(pcm.size());
      for (size_t i = 0; i < pcm.size(); ++i) w.samples[i] = pcm[i] / 32767.0;
      w.sample_rate = sample_rate;
      w.duration = sample_rate ? static_cast<double>(pcm.size()) / sample_rate : 0.0;
      return w;
    } else {
      for (uint32_t skip = 0; skip < chunk_size; ++skip) reader.read_u8();
    }
  }
  raise(ErrorKind::Parse, kModule, "no data chunk in '" + path + "'");
}

}  // namespace objf
