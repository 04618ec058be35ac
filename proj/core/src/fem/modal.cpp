#include "objf/fem/modal.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include "objf/common/binary_io.hpp"
#include "objf/common/error.hpp"
#include "objf/common/log.hpp"
#include "objf/common/rng.hpp"

namespace objf {

namespace {

constexpr const char* kModule = "modal_fem";
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Isotropic Hooke tensor in Voigt order (xx, yy, zz, xy, yz, zx) with
// engineering shear strains.
Eigen::Matrix<double, 6, 6> hooke_tensor(const MaterialParams& m) {
  const double e = m.young_modulus;
  const double nu = m.poisson_ratio;
  const double lame = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double shear = e / (2.0 * (1.0 + nu));
  Eigen::Matrix<double, 6, 6> c = Eigen::Matrix<double, 6, 6>::Zero();
  c.block<3, 3>(0, 0).setConstant(lame);
  c.diagonal().head<3>().array() += 2.0 * shear;
  c.diagonal().tail<3>().setConstant(shear);
  return c;
}

}  // namespace

Eigen::VectorXd FemSystem::mass_diagonal() const { return mass.diagonal(); }

Eigen::Matrix<double, 12, 12> element_stiffness(const Vec3& a, const Vec3& b, const Vec3& c,
                                                const Vec3& d, const MaterialParams& material) {
  Eigen::Matrix3d edges;
  edges.col(0) = b - a;
  edges.col(1) = c - a;
  edges.col(2) = d - a;
  const double vol = edges.determinant() / 6.0;
  require(vol >= 1e-15, ErrorKind::Validation, kModule,
          "degenerate tetrahedron (volume < 1e-15)");

  // Gradients of the barycentric shape functions; the first is minus the sum
  // of the others so a constant field has zero gradient.
  const Eigen::Matrix3d grads123 = edges.inverse().eval();  // rows are grad(l1..l3)
  Eigen::Matrix<double, 4, 3> grad;
  grad.row(1) = grads123.row(0);
  grad.row(2) = grads123.row(1);
  grad.row(3) = grads123.row(2);
  grad.row(0) = -(grad.row(1) + grad.row(2) + grad.row(3));

  Eigen::Matrix<double, 6, 12> strain = Eigen::Matrix<double, 6, 12>::Zero();
  for (int v = 0; v < 4; ++v) {
    const double gx = grad(v, 0), gy = grad(v, 1), gz = grad(v, 2);
    const int col = 3 * v;
    strain(0, col + 0) = gx;
    strain(1, col + 1) = gy;
    strain(2, col + 2) = gz;
    strain(3, col + 0) = gy;
    strain(3, col + 1) = gx;
    strain(4, col + 1) = gz;
    strain(4, col + 2) = gy;
    strain(5, col + 0) = gz;
    strain(5, col + 2) = gx;
  }
  return vol * strain.transpose() * hooke_tensor(material) * strain;
}

FemSystem assemble(const TetMesh& mesh, const MaterialParams& material) {
  validate_material(material);
  require(!mesh.vertices.empty() && !mesh.tets.empty(), ErrorKind::Validation, kModule,
          "cannot assemble an empty tetrahedral mesh");

  const int nv = static_cast<int>(mesh.vertices.size());
  const int dof = 3 * nv;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.tets.size() * 144);
  Eigen::VectorXd lumped = Eigen::VectorXd::Zero(dof);

  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const Eigen::Vector4i& tet = mesh.tets[t];
    const Vec3& a = mesh.vertices[tet[0]];
    const Vec3& b = mesh.vertices[tet[1]];
    const Vec3& c = mesh.vertices[tet[2]];
    const Vec3& d = mesh.vertices[tet[3]];

    const double vol = tet_volume(a, b, c, d);
    require(vol >= 1e-15, ErrorKind::Validation, kModule,
            "degenerate tetrahedron at index " + std::to_string(t));

    Eigen::Matrix<double, 12, 12> ke;
    try {
      ke = element_stiffness(a, b, c, d, material);
    } catch (const Error&) {
      raise(ErrorKind::Validation, kModule,
            "degenerate tetrahedron at index " + std::to_string(t));
    }

    const double corner_mass = material.density * vol / 4.0;
    for (int i = 0; i < 4; ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        lumped[FemSystem::dof_index(tet[i], axis)] += corner_mass;
      }
      for (int j = 0; j < 4; ++j) {
        for (int bi = 0; bi < 3; ++bi) {
          for (int bj = 0; bj < 3; ++bj) {
            triplets.emplace_back(FemSystem::dof_index(tet[i], bi),
                                  FemSystem::dof_index(tet[j], bj), ke(3 * i + bi, 3 * j + bj));
          }
        }
      }
    }
  }

  FemSystem system;
  system.num_vertices = nv;
  system.stiffness.resize(dof, dof);
  system.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  system.stiffness.makeCompressed();

  require(lumped.minCoeff() > 0.0, ErrorKind::Validation, kModule,
          "mesh has vertices not referenced by any tetrahedron");
  std::vector<Eigen::Triplet<double>> mass_triplets;
  mass_triplets.reserve(dof);
  for (int i = 0; i < dof; ++i) mass_triplets.emplace_back(i, i, lumped[i]);
  system.mass.resize(dof, dof);
  system.mass.setFromTriplets(mass_triplets.begin(), mass_triplets.end());
  system.mass.makeCompressed();
  return system;
}

namespace {

struct RitzWindow {
  Eigen::VectorXd lambda;  // ascending
  Eigen::MatrixXd modes;   // M-orthonormal columns
};

// Relative residual ||K u - l M u|| / ||K u|| per selected column.
Eigen::VectorXd eigen_residuals(const Eigen::MatrixXd& ku, const Eigen::MatrixXd& mu,
                                const Eigen::VectorXd& lambda) {
  Eigen::VectorXd res(lambda.size());
  for (int i = 0; i < lambda.size(); ++i) {
    const double denom = std::max(ku.col(i).norm(), 1e-300);
    res[i] = (ku.col(i) - lambda[i] * mu.col(i)).norm() / denom;
  }
  return res;
}

RitzWindow dense_window(const FemSystem& system) {
  const Eigen::VectorXd mdiag = system.mass_diagonal();
  const Eigen::VectorXd inv_sqrt = mdiag.cwiseSqrt().cwiseInverse();

  Eigen::MatrixXd a = Eigen::MatrixXd(system.stiffness);
  a = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
  a = 0.5 * (a + a.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  require(solver.info() == Eigen::Success, ErrorKind::Numerical, kModule,
          "dense eigensolver failed to converge");

  RitzWindow w;
  w.lambda = solver.eigenvalues();
  w.modes = inv_sqrt.asDiagonal() * solver.eigenvectors();
  return w;
}

// Shift-invert subspace iteration about the bottom of the requested band.
// Factors K - shift*M once and refines a block until the in-band Ritz pairs
// meet the residual target.
RitzWindow subspace_window(const FemSystem& system, double lambda_lo, double lambda_hi,
                           int block, const ModalSolveOptions& options, bool* converged,
                           double* achieved_residual) {
  const int dof = system.dof();
  block = std::min(block, dof);
  const double shift = lambda_lo > 0.0 ? lambda_lo : -1.0;

  Eigen::SparseMatrix<double> shifted = system.stiffness - shift * system.mass;
  shifted.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(shifted);
  require(lu.info() == Eigen::Success, ErrorKind::Numerical, kModule,
          "factorization of the shifted stiffness matrix failed");

  const Eigen::VectorXd mdiag = system.mass_diagonal();
  Rng rng(options.seed, 7);
  Eigen::MatrixXd x(dof, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < dof; ++i) x(i, j) = rng.normal();

  RitzWindow w;
  *converged = false;
  *achieved_residual = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd work = mdiag.asDiagonal() * x;
    work = lu.solve(work);

    // M-orthonormalize the block, with a plain QR fallback if the Gram matrix
    // loses positive definiteness.
    Eigen::MatrixXd gram = work.transpose() * (mdiag.asDiagonal() * work);
    gram = 0.5 * (gram + gram.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
      work = llt.matrixU().solve<Eigen::OnTheRight>(work);
    } else {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(work);
      work = qr.householderQ() * Eigen::MatrixXd::Identity(dof, block);
      gram = work.transpose() * (mdiag.asDiagonal() * work);
      gram = 0.5 * (gram + gram.transpose()).eval();
      Eigen::LLT<Eigen::MatrixXd> llt2(gram);
      require(llt2.info() == Eigen::Success, ErrorKind::Numerical, kModule,
              "subspace basis collapsed during iteration");
      work = llt2.matrixU().solve<Eigen::OnTheRight>(work);
    }

    const Eigen::MatrixXd kw = system.stiffness * work;
    Eigen::MatrixXd h = work.transpose() * kw;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::MatrixXd g = work.transpose() * (mdiag.asDiagonal() * work);
    g = 0.5 * (g + g.transpose()).eval();

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h, g);
    require(ritz.info() == Eigen::Success, ErrorKind::Numerical, kModule,
            "Rayleigh-Ritz projection failed");

    x = work * ritz.eigenvectors();
    w.lambda = ritz.eigenvalues();
    w.modes = x;

    // Convergence is judged on the pairs inside the band only; pairs at the
    // edge of the window are expected to lag.
    const Eigen::MatrixXd ku = kw * ritz.eigenvectors();
    const Eigen::MatrixXd mu = mdiag.asDiagonal() * x;
    const Eigen::VectorXd res = eigen_residuals(ku, mu, w.lambda);
    double worst = 0.0;
    bool any = false;
    for (int i = 0; i < w.lambda.size(); ++i) {
      if (w.lambda[i] < lambda_lo || w.lambda[i] > lambda_hi) continue;
      any = true;
      worst = std::max(worst, res[i]);
    }
    if (!any) {
      // Nothing in band yet (or the band is empty); keep iterating a few
      // times so slow modes can enter, then let the caller decide.
      if (iter >= 8) {
        *achieved_residual = 0.0;
        *converged = true;
        return w;
      }
      continue;
    }
    *achieved_residual = worst;
    if (worst <= options.residual_tol) {
      *converged = true;
      return w;
    }
  }
  return w;
}

}  // namespace

Eigenpairs modal_decompose(const FemSystem& system, const FrequencyBand& band, int max_modes,
                           const ModalSolveOptions& options) {
  require(system.num_vertices > 0 && system.stiffness.rows() == system.dof() &&
              system.mass.rows() == system.dof(),
          ErrorKind::InvalidArgument, kModule, "invalid FEM system");
  require(band.min_hz >= 0.0 && band.max_hz > band.min_hz, ErrorKind::InvalidArgument, kModule,
          "frequency band must satisfy 0 <= min < max");
  require(max_modes > 0, ErrorKind::InvalidArgument, kModule, "max_modes must be positive");

  const double lambda_lo = std::pow(kTwoPi * band.min_hz, 2);
  const double lambda_hi = std::pow(kTwoPi * band.max_hz, 2);

  const bool use_dense = options.solver == ModalSolveOptions::Solver::Dense ||
                         (options.solver == ModalSolveOptions::Solver::Auto &&
                          system.dof() <= options.dense_dof_limit);

  RitzWindow window;
  bool window_complete = true;  // dense windows always cover the full spectrum
  if (use_dense) {
    log_debug("modal_decompose: dense path, dof=", system.dof());
    window = dense_window(system);
  } else {
    log_debug("modal_decompose: subspace path, dof=", system.dof());
    int block = std::min(system.dof(), max_modes + 16);
    for (int attempt = 0;; ++attempt) {
      bool converged = false;
      double residual = 0.0;
      window = subspace_window(system, lambda_lo, lambda_hi, block, options, &converged,
                               &residual);
      if (!converged) {
        raise(ErrorKind::Numerical, kModule,
              "subspace iteration did not converge (worst in-band relative residual " +
                  std::to_string(residual) + " after " +
                  std::to_string(options.max_iterations) + " iterations)");
      }
      int in_band = 0;
      for (int i = 0; i < window.lambda.size(); ++i)
        if (window.lambda[i] >= lambda_lo && window.lambda[i] <= lambda_hi) ++in_band;
      const bool band_exhausted =
          window.lambda.size() > 0 && window.lambda[window.lambda.size() - 1] > lambda_hi;
      if (in_band >= max_modes || band_exhausted || block >= system.dof() || attempt >= 2) {
        window_complete = band_exhausted || in_band >= max_modes;
        break;
      }
      block = std::min(system.dof(), block * 2);
      log_info("modal_decompose: widening subspace block to ", block);
    }
  }

  std::vector<int> selected;
  for (int i = 0; i < window.lambda.size() && static_cast<int>(selected.size()) < max_modes; ++i) {
    if (window.lambda[i] >= lambda_lo && window.lambda[i] <= lambda_hi) selected.push_back(i);
  }
  if (selected.empty()) {
    raise(ErrorKind::Validation, kModule,
          "no eigenvalue in frequency band [" + std::to_string(band.min_hz) + ", " +
              std::to_string(band.max_hz) + "] Hz");
  }
  if (!window_complete) {
    log_warn("modal_decompose: computed window may not cover the full band; returning ",
             selected.size(), " modes");
  }

  Eigenpairs out;
  out.lambda.resize(selected.size());
  out.modes.resize(system.dof(), selected.size());
  for (size_t j = 0; j < selected.size(); ++j) {
    out.lambda[j] = window.lambda[selected[j]];
    out.modes.col(j) = window.modes.col(selected[j]);
  }
  int below = 0;
  for (int i = 0; i < window.lambda.size(); ++i)
    if (window.lambda[i] < lambda_lo) ++below;
  out.discarded_below_band = below;

  const Eigen::MatrixXd ku = system.stiffness * out.modes;
  const Eigen::MatrixXd mu = system.mass_diagonal().asDiagonal() * out.modes;
  out.max_residual = eigen_residuals(ku, mu, out.lambda).maxCoeff();
  if (out.max_residual > 1e-6) {
    raise(ErrorKind::Numerical, kModule,
          "eigenpair residual " + std::to_string(out.max_residual) +
              " exceeds 1e-6 relative tolerance");
  }
  return out;
}

ModalModel build_modal_model(const Eigenpairs& pairs, const MaterialParams& material,
                             int num_vertices) {
  validate_material(material);
  require(pairs.lambda.size() == pairs.modes.cols(), ErrorKind::InvalidArgument, kModule,
          "eigenvalue/eigenvector count mismatch");
  require(pairs.modes.rows() == 3 * static_cast<Eigen::Index>(num_vertices),
          ErrorKind::InvalidArgument, kModule, "eigenvector size does not match vertex count");

  const int n = static_cast<int>(pairs.lambda.size());
  std::vector<int> kept;
  kept.reserve(n);
  int dropped = 0;
  for (int i = 0; i < n; ++i) {
    const double lambda = pairs.lambda[i];
    const double damping = 0.5 * (material.rayleigh_alpha + material.rayleigh_beta * lambda);
    if (damping * damping >= lambda) {
      ++dropped;
      continue;
    }
    kept.push_back(i);
  }
  if (dropped > 0) log_warn("build_modal_model: dropped ", dropped, " overdamped modes");

  ModalModel model;
  model.num_vertices = num_vertices;
  model.overdamped_dropped = dropped;
  model.omega_hz.resize(kept.size());
  model.damping.resize(kept.size());
  model.gains.resize(pairs.modes.rows(), kept.size());
  for (size_t j = 0; j < kept.size(); ++j) {
    const double lambda = pairs.lambda[kept[j]];
    const double damping = 0.5 * (material.rayleigh_alpha + material.rayleigh_beta * lambda);
    model.damping[j] = damping;
    model.omega_hz[j] = std::sqrt(lambda - damping * damping) / kTwoPi;
    model.gains.col(j) = pairs.modes.col(kept[j]);
  }
  return model;
}

void save_modal_cache(const std::string& path, const ModalModel& model) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, kModule, "cannot open '" + path + "' for writing");
  BinaryWriter writer(out);
  writer.write_magic("MODL");
  writer.write_u32(1);
  writer.write_u32(static_cast<uint32_t>(model.num_modes()));
  writer.write_u32(static_cast<uint32_t>(model.num_vertices));
  for (int i = 0; i < model.num_modes(); ++i) writer.write_f64(model.omega_hz[i]);
  for (int i = 0; i < model.num_modes(); ++i) writer.write_f64(model.damping[i]);

  const int rows = static_cast<int>(model.gains.rows());
  const int cols = model.num_modes();
  std::vector<float> buf(static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      buf[static_cast<size_t>(r) * cols + c] = static_cast<float>(model.gains(r, c));
  if (!buf.empty()) writer.write_bytes(buf.data(), buf.size() * sizeof(float));
  out.flush();
  require(out.good(), ErrorKind::Io, kModule, "failed writing '" + path + "'");
}

ModalModel load_modal_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, kModule, "cannot open '" + path + "'");
  BinaryReader reader(in, "modal cache '" + path + "'");
  reader.expect_magic("MODL");
  const uint32_t version = reader.read_u32();
  require(version == 1, ErrorKind::Parse, kModule,
          "unsupported modal cache version " + std::to_string(version));
  const uint32_t n = reader.read_u32();
  const uint32_t nv = reader.read_u32();
  require(n <= 1u << 20, ErrorKind::Parse, kModule, "mode count out of range");
  require(nv >= 1 && nv <= 1u << 27, ErrorKind::Parse, kModule, "vertex count out of range");

  ModalModel model;
  model.num_vertices = static_cast<int>(nv);
  model.omega_hz.resize(n);
  model.damping.resize(n);
  for (uint32_t i = 0; i < n; ++i) model.omega_hz[i] = reader.read_f64();
  for (uint32_t i = 0; i < n; ++i) model.damping[i] = reader.read_f64();
  for (uint32_t i = 0; i < n; ++i) {
    require(std::isfinite(model.omega_hz[i]) && model.omega_hz[i] > 0.0, ErrorKind::Parse,
            kModule, "non-positive frequency in modal cache");
    require(std::isfinite(model.damping[i]) && model.damping[i] >= 0.0, ErrorKind::Parse,
            kModule, "negative damping in modal cache");
  }

  const size_t rows = static_cast<size_t>(nv) * 3;
  std::vector<float> buf(rows * n);
  if (!buf.empty()) reader.read_bytes(buf.data(), buf.size() * sizeof(float));
  model.gains.resize(rows, n);
  for (size_t r = 0; r < rows; ++r)
    for (uint32_t c = 0; c < n; ++c) model.gains(r, c) = buf[r * n + c];
  require(reader.at_eof(), ErrorKind::Parse, kModule, "trailing bytes in modal cache");
  return model;
}

}  // namespace objf
