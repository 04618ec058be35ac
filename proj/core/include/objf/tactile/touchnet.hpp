#pragma once

#include <cstdint>
#include <vector>

#include "objf/geometry/bvh.hpp"
#include "objf/nn/object_file.hpp"
#include "objf/tactile/deform.hpp"

namespace objf {

struct TouchFitConfig {
  int num_contacts = 64;
  int map_size = 64;
  double pixel_pitch = 0.00025;
  // Extra self-rendered windows that only add training coverage; they never
  // join the dataset the reported reconstruction numbers are measured on.
  int coverage_contacts = 192;
  std::vector<int> hidden = std::vector<int>{96, 96, 96};
  double learning_rate = 2e-3;
  int batch_size = 512;
  int epochs = 12;
  uint64_t seed = 0;
  int threads = 0;
};

struct TouchNetModel {
  TouchNetData data;
  Aabb bounds;  // object bounds the contact positions are normalized by
  double train_psnr = 0.0;     // reconstruction of the contacts trained on
  double held_out_psnr = 0.0;  // reconstruction of contacts never seen in training
  int64_t dataset_pixels = 0;  // contacts times map pixels
};

// Draws contact placements across the surface: triangles by area, a point
// uniform within the triangle, the press direction uniform over the allowed
// cone around the face normal, and the depth uniform over the press range.
// Fully determined by the seed.
std::vector<ContactSpec> sample_contact_specs(const Bvh& bvh, int count, uint64_t seed,
                                              int map_size = 64, double pixel_pitch = 0.00025);

// Renders deformation maps for sampled contacts and trains a network on them.
// The network learns a truncated signed-distance field of the surface from
// points along every rendered pixel ray; reconstructing a contact then reads
// the field back along that contact's rays. Roughly one contact in ten is
// held out of training entirely to measure generalization.
TouchNetModel fit_touchnet(const SurfaceMesh& mesh, const TouchFitConfig& cfg = {});

// Reconstructs the deformation map for a contact from the trained network by
// locating the field's surface crossing along each pad pixel's press ray.
// The pad geometry must match what the network was trained for, and the
// pressing depth must lie inside the trained range.
DeformationMap touchnet_eval(const TouchNetData& data, const Aabb& bounds, const ContactSpec& spec);
DeformationMap touchnet_eval(const TouchNetModel& model, const ContactSpec& spec);

TouchNetModel touchnet_from_object(const ObjectFile& object);

}  // namespace objf
