#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <string>

#include "objf/fem/material.hpp"
#include "objf/geometry/voxelize.hpp"

namespace objf {

// Degrees of freedom are packed as row = 3*vertex + axis.
struct FemSystem {
  Eigen::SparseMatrix<double> mass;       // diagonal (lumped), positive entries
  Eigen::SparseMatrix<double> stiffness;  // symmetric positive-semidefinite
  int num_vertices = 0;

  int dof() const { return 3 * num_vertices; }
  static int dof_index(int vertex, int axis) { return 3 * vertex + axis; }
  Eigen::VectorXd mass_diagonal() const;
};

FemSystem assemble(const TetMesh& mesh, const MaterialParams& material);

// Element stiffness for one linear tetrahedron, nodal order (v0..v3) x (x,y,z).
Eigen::Matrix<double, 12, 12> element_stiffness(const Vec3& a, const Vec3& b, const Vec3& c,
                                                const Vec3& d, const MaterialParams& material);

struct FrequencyBand {
  double min_hz = 20.0;
  double max_hz = 20000.0;
};

struct ModalSolveOptions {
  enum class Solver { Auto, Dense, Subspace };
  Solver solver = Solver::Auto;
  // Auto uses the dense solver up to this many degrees of freedom.
  int dense_dof_limit = 6000;
  double residual_tol = 1e-9;  // relative eigenpair residual target
  int max_iterations = 80;
  uint64_t seed = 0x0DA1;
};

struct Eigenpairs {
  Eigen::VectorXd lambda;  // ascending, inside the requested band
  Eigen::MatrixXd modes;   // dof x n, columns mass-normalized
  int discarded_below_band = 0;
  double max_residual = 0.0;
};

Eigenpairs modal_decompose(const FemSystem& system, const FrequencyBand& band, int max_modes,
                           const ModalSolveOptions& options = {});

struct ModalModel {
  Eigen::VectorXd omega_hz;  // damped frequencies, ascending
  Eigen::VectorXd damping;   // decay rates, 1/s
  Eigen::MatrixXd gains;     // 3V x N; row (3v+a) holds per-mode gains for a unit
                             // impulse at vertex v along axis a
  int num_vertices = 0;
  bool mass_normalized = true;
  int overdamped_dropped = 0;

  int num_modes() const { return static_cast<int>(omega_hz.size()); }
};

ModalModel build_modal_model(const Eigenpairs& pairs, const MaterialParams& material,
                             int num_vertices);

void save_modal_cache(const std::string& path, const ModalModel& model);
ModalModel load_modal_cache(const std::string& path);

}  // namespace objf
