#include "objf/nn/object_file.hpp"

#include <fstream>
#include <sstream>

#include "objf/common/binary_io.hpp"
#include "objf/common/error.hpp"

namespace objf {

namespace {

constexpr const char* kModule = "implicit_core";
constexpr uint32_t kVersion = 2;

void write_mlp(BinaryWriter& w, const Mlp& net) {
  require(net.dims.size() >= 2 && net.weights.size() + 1 == net.dims.size(),
          ErrorKind::Validation, kModule, "cannot serialize a malformed network");
  require(net.finite(), ErrorKind::Validation, kModule,
          "cannot serialize non-finite network parameters");
  w.write_u32(static_cast<uint32_t>(net.dims.size()));
  for (int d : net.dims) w.write_u32(static_cast<uint32_t>(d));
  for (size_t l = 0; l < net.weights.size(); ++l) {
    // Row-major weight block, then the bias vector.
    for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c) w.write_f32(net.weights[l](r, c));
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) w.write_f32(net.biases[l][i]);
  }
}

Mlp read_mlp(BinaryReader& r) {
  const uint32_t ndims = r.read_u32();
  require(ndims >= 2 && ndims <= 64, ErrorKind::Parse, kModule, "network dim count out of range");
  std::vector<int> dims(ndims);
  for (auto& d : dims) {
    const uint32_t v = r.read_u32();
    require(v >= 1 && v <= 1u << 20, ErrorKind::Parse, kModule, "network dim out of range");
    d = static_cast<int>(v);
  }
  Mlp net;
  net.dims = dims;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Mlp::Matrix w(dims[l + 1], dims[l]);
    for (Eigen::Index row = 0; row < w.rows(); ++row)
      for (Eigen::Index col = 0; col < w.cols(); ++col) w(row, col) = r.read_f32();
    Mlp::Vector b(dims[l + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = r.read_f32();
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  require(net.finite(), ErrorKind::Parse, kModule, "non-finite network parameters");
  return net;
}

void write_f64_vector(BinaryWriter& w, const Eigen::VectorXd& v) {
  w.write_u32(static_cast<uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) w.write_f64(v[i]);
}

Eigen::VectorXd read_f64_vector(BinaryReader& r, uint32_t max_len) {
  const uint32_t n = r.read_u32();
  require(n <= max_len, ErrorKind::Parse, kModule, "vector length out of range");
  Eigen::VectorXd v(n);
  for (uint32_t i = 0; i < n; ++i) v[i] = r.read_f64();
  return v;
}

std::string vision_payload(const VisionNetData& data) {
  const size_t num_cells = static_cast<size_t>(data.grid_resolution) * data.grid_resolution *
                           data.grid_resolution;
  require(data.cells.size() == num_cells, ErrorKind::Validation, kModule,
          "cell network count does not match the grid resolution");
  require(data.occupancy_bits.size() == (num_cells + 7) / 8, ErrorKind::Validation, kModule,
          "occupancy bitmask size does not match the grid resolution");

  std::ostringstream out(std::ios::binary);
  BinaryWriter w(out);
  w.write_u32(static_cast<uint32_t>(data.grid_resolution));
  w.write_u32(static_cast<uint32_t>(data.encoding_frequencies));
  w.write_bytes(data.occupancy_bits.data(), data.occupancy_bits.size());

  // Shared cell architecture, then per-cell parameters. Unoccupied cells
  // carry a single marker byte and reconstruct as canonical zero networks.
  const std::vector<int>& dims = data.cells.front().dims;
  w.write_u32(static_cast<uint32_t>(dims.size()));
  for (int d : dims) w.write_u32(static_cast<uint32_t>(d));
  for (size_t i = 0; i < num_cells; ++i) {
    require(data.cells[i].dims == dims, ErrorKind::Validation, kModule,
            "scene cells must share one architecture");
    if (!data.cell_occupied(i)) {
      w.write_u8(0);
      continue;
    }
    w.write_u8(1);
    require(data.cells[i].finite(), ErrorKind::Validation, kModule,
            "cannot serialize non-finite cell parameters");
    for (size_t l = 0; l < data.cells[i].weights.size(); ++l) {
      const auto& wm = data.cells[i].weights[l];
      for (Eigen::Index r = 0; r < wm.rows(); ++r)
        for (Eigen::Index c = 0; c < wm.cols(); ++c) w.write_f32(wm(r, c));
      for (Eigen::Index b = 0; b < data.cells[i].biases[l].size(); ++b)
        w.write_f32(data.cells[i].biases[l][b]);
    }
  }
  return out.str();
}

VisionNetData parse_vision(const std::string& payload) {
  std::istringstream in(payload, std::ios::binary);
  BinaryReader r(in, "vision section");
  VisionNetData data;
  data.grid_resolution = static_cast<int>(r.read_u32());
  require(data.grid_resolution >= 1 && data.grid_resolution <= 256, ErrorKind::Parse, kModule,
          "grid resolution out of range");
  data.encoding_frequencies = static_cast<int>(r.read_u32());
  require(data.encoding_frequencies >= 0 && data.encoding_frequencies <= 32, ErrorKind::Parse,
          kModule, "encoding frequency count out of range");

  const size_t num_cells = static_cast<size_t>(data.grid_resolution) * data.grid_resolution *
                           data.grid_resolution;
  data.occupancy_bits.resize((num_cells + 7) / 8);
  r.read_bytes(data.occupancy_bits.data(), data.occupancy_bits.size());

  const uint32_t ndims = r.read_u32();
  require(ndims >= 2 && ndims <= 64, ErrorKind::Parse, kModule, "cell dim count out of range");
  std::vector<int> dims(ndims);
  for (auto& d : dims) {
    const uint32_t v = r.read_u32();
    require(v >= 1 && v <= 1u << 16, ErrorKind::Parse, kModule, "cell dim out of range");
    d = static_cast<int>(v);
  }

  data.cells.reserve(num_cells);
  for (size_t i = 0; i < num_cells; ++i) {
    const uint8_t marker = r.read_u8();
    require(marker <= 1, ErrorKind::Parse, kModule, "invalid cell marker");
    require((marker == 1) == data.cell_occupied(i), ErrorKind::Parse, kModule,
            "cell marker disagrees with the occupancy bitmask");
    if (marker == 0) {
      data.cells.push_back(make_zero_mlp<float>(dims));
      continue;
    }
    Mlp net;
    net.dims = dims;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
      Mlp::Matrix w(dims[l + 1], dims[l]);
      for (Eigen::Index row = 0; row < w.rows(); ++row)
        for (Eigen::Index col = 0; col < w.cols(); ++col) w(row, col) = r.read_f32();
      Mlp::Vector b(dims[l + 1]);
      for (Eigen::Index bi = 0; bi < b.size(); ++bi) b[bi] = r.read_f32();
      net.weights.push_back(std::move(w));
      net.biases.push_back(std::move(b));
    }
    require(net.finite(), ErrorKind::Parse, kModule, "non-finite cell parameters");
    data.cells.push_back(std::move(net));
  }
  require(r.at_eof(), ErrorKind::Parse, kModule, "trailing bytes in vision section");
  return data;
}

std::string audio_payload(const AudioNetData& data) {
  const Eigen::Index n = data.omega_hz.size();
  require(data.damping.size() == n && data.gain_mean.size() == n && data.gain_scale.size() == n,
          ErrorKind::Validation, kModule, "audio mode arrays must share one length");
  require(data.branch_x.output_dim() == n && data.branch_y.output_dim() == n &&
              data.branch_z.output_dim() == n,
          ErrorKind::Validation, kModule, "audio branch output dims must equal the mode count");

  std::ostringstream out(std::ios::binary);
  BinaryWriter w(out);
  write_f64_vector(w, data.omega_hz);
  write_f64_vector(w, data.damping);
  write_f64_vector(w, data.gain_mean);
  write_f64_vector(w, data.gain_scale);
  write_mlp(w, data.branch_x);
  write_mlp(w, data.branch_y);
  write_mlp(w, data.branch_z);
  w.write_u32(static_cast<uint32_t>(data.vertices.size()));
  for (const auto& v : data.vertices) {
    w.write_f32(v.x());
    w.write_f32(v.y());
    w.write_f32(v.z());
  }
  return out.str();
}

AudioNetData parse_audio(const std::string& payload) {
  std::istringstream in(payload, std::ios::binary);
  BinaryReader r(in, "audio section");
  AudioNetData data;
  data.omega_hz = read_f64_vector(r, 1u << 20);
  data.damping = read_f64_vector(r, 1u << 20);
  data.gain_mean = read_f64_vector(r, 1u << 20);
  data.gain_scale = read_f64_vector(r, 1u << 20);
  data.branch_x = read_mlp(r);
  data.branch_y = read_mlp(r);
  data.branch_z = read_mlp(r);
  const uint32_t nv = r.read_u32();
  require(nv <= 1u << 27, ErrorKind::Parse, kModule, "vertex count out of range");
  data.vertices.resize(nv);
  for (uint32_t i = 0; i < nv; ++i) {
    data.vertices[i].x() = r.read_f32();
    data.vertices[i].y() = r.read_f32();
    data.vertices[i].z() = r.read_f32();
  }
  require(r.at_eof(), ErrorKind::Parse, kModule, "trailing bytes in audio section");

  const Eigen::Index n = data.omega_hz.size();
  require(data.damping.size() == n && data.gain_mean.size() == n && data.gain_scale.size() == n,
          ErrorKind::Parse, kModule, "audio mode arrays must share one length");
  require(data.branch_x.output_dim() == n && data.branch_y.output_dim() == n &&
              data.branch_z.output_dim() == n,
          ErrorKind::Parse, kModule, "audio branch output dims must equal the mode count");
  return data;
}

std::string touch_payload(const TouchNetData& data) {
  std::ostringstream out(std::ios::binary);
  BinaryWriter w(out);
  write_mlp(w, data.net);
  w.write_f64(data.min_depth);
  w.write_f64(data.max_depth);
  w.write_f64(data.max_angle_deg);
  w.write_u32(static_cast<uint32_t>(data.map_size));
  w.write_f64(data.pixel_pitch);
  return out.str();
}

TouchNetData parse_touch(const std::string& payload) {
  std::istringstream in(payload, std::ios::binary);
  BinaryReader r(in, "touch section");
  TouchNetData data;
  data.net = read_mlp(r);
  data.min_depth = r.read_f64();
  data.max_depth = r.read_f64();
  data.max_angle_deg = r.read_f64();
  data.map_size = static_cast<int>(r.read_u32());
  data.pixel_pitch = r.read_f64();
  require(r.at_eof(), ErrorKind::Parse, kModule, "trailing bytes in touch section");
  require(data.min_depth > 0 && data.max_depth >= data.min_depth, ErrorKind::Parse, kModule,
          "invalid touch depth range");
  require(data.map_size >= 1 && data.map_size <= 4096 && data.pixel_pitch > 0,
          ErrorKind::Parse, kModule, "invalid touch map geometry");
  return data;
}

}  // namespace

void save_object_file(const std::string& path, const ObjectFile& of) {
  require(of.bounds.valid(), ErrorKind::Validation, kModule, "object bounds are invalid");
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, kModule, "cannot open '" + path + "' for writing");

  BinaryWriter w(out);
  w.write_magic("OBJF");
  w.write_u32(kVersion);
  uint32_t flags = 0;
  if (of.vision) flags |= 1u << 0;
  if (of.audio) flags |= 1u << 1;
  if (of.touch) flags |= 1u << 2;
  w.write_u32(flags);
  for (int i = 0; i < 3; ++i) w.write_f64(of.bounds.b_min[i]);
  for (int i = 0; i < 3; ++i) w.write_f64(of.bounds.b_max[i]);
  w.write_string(of.object_id);
  w.write_string(of.material);

  if (of.vision) write_section(out, fourcc("VISN"), vision_payload(*of.vision));
  if (of.audio) write_section(out, fourcc("AUDN"), audio_payload(*of.audio));
  if (of.touch) write_section(out, fourcc("TOCH"), touch_payload(*of.touch));
  out.flush();
  require(out.good(), ErrorKind::Io, kModule, "failed writing '" + path + "'");
}

ObjectFile load_object_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, kModule, "cannot open '" + path + "'");
  BinaryReader r(in, "object file '" + path + "'");

  r.expect_magic("OBJF");
  const uint32_t version = r.read_u32();
  require(version == kVersion, ErrorKind::Parse, kModule,
          "unsupported object file version " + std::to_string(version));
  const uint32_t flags = r.read_u32();
  require((flags & ~7u) == 0, ErrorKind::Parse, kModule, "unknown flag bits set");

  ObjectFile of;
  for (int i = 0; i < 3; ++i) of.bounds.b_min[i] = r.read_f64();
  for (int i = 0; i < 3; ++i) of.bounds.b_max[i] = r.read_f64();
  require(of.bounds.valid(), ErrorKind::Parse, kModule, "invalid bounds in header");
  of.object_id = r.read_string(1 << 16);
  of.material = r.read_string(1 << 16);

  struct Expected {
    uint32_t bit;
    const char* tag;
    const char* name;
  };
  const Expected sections[3] = {
      {1u << 0, "VISN", "vision"}, {1u << 1, "AUDN", "audio"}, {1u << 2, "TOCH", "touch"}};
  for (const auto& section : sections) {
    if (!(flags & section.bit)) continue;
    const SectionData raw = read_section(in, std::string(section.name) + " section");
    require(raw.tag == fourcc(section.tag), ErrorKind::Parse, kModule,
            std::string("unexpected section tag, wanted ") + section.tag);
    if (section.bit == 1u << 0) of.vision = parse_vision(raw.payload);
    if (section.bit == 1u << 1) of.audio = parse_audio(raw.payload);
    if (section.bit == 1u << 2) of.touch = parse_touch(raw.payload);
  }
  require(r.at_eof(), ErrorKind::Parse, kModule, "trailing bytes after the last section");
  return of;
}

}  // namespace objf
