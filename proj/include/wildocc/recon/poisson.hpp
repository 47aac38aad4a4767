#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "wildocc/core/types.hpp"
#include "wildocc/recon/krylov.hpp"
#include "wildocc/recon/normals.hpp"

namespace wildocc::recon {

enum class KrylovMethod { kConjugateResidual, kConjugateGradient };

struct PoissonConfig {
  /// The lattice has 2^depth cells per axis over the padded bounding cube.
  int depth = 8;
  int cg_max_iters = 2000;
  double cg_tol = 1e-8;
  /// Band half-width around each sample, in cells (a 1-ring is added on top).
  double splat_radius = 2.0;
  /// Neighbours used for the per-sample area estimate.
  int density_k = 8;
  KrylovMethod solver = KrylovMethod::kConjugateResidual;
  /// Box the lattice cube must cover in addition to the samples. Sharing one
  /// domain between inputs gives equal depths equal cell sizes.
  std::optional<Eigen::AlignedBox3d> domain;

  /// Throws kPrecondition unless 3 <= depth <= 13, cg_tol in (0,1), etc.
  void validate() const;
};

/// Discrete Poisson problem on a sparse, hash-indexed regular lattice.
///
/// The indicator lives at cell centers of the active band. The normal field
/// is splatted trilinearly onto a staggered (face-centered) lattice with a
/// per-sample area weight, so the discrete Laplacian is exactly div(grad)
/// and the system is the normal equation of min sum_f (grad chi - V)^2 over
/// faces interior to the band. Band boundary faces carry no equation
/// (zero-flux), leaving the Laplacian symmetric positive semidefinite with
/// one constant null vector per connected band component.
class PoissonSystem {
 public:
  PoissonSystem(const OrientedPointSet& input, const PoissonConfig& cfg);

  double cell_size() const { return h_; }
  /// World position of lattice corner (0,0,0).
  const Point3& lattice_origin() const { return origin_; }
  int cells_per_axis() const { return 1 << cfg_.depth; }

  std::size_t active_count() const { return cells_.size(); }
  const std::vector<Index3>& active_cells() const { return cells_; }
  std::optional<std::int32_t> find(const Index3& cell) const;
  Point3 cell_center(const Index3& cell) const;

  /// V on the face between `upper - e_axis` and `upper` (units 1/m); zero
  /// when that face is not interior to the band.
  double face_field(const Index3& upper, int axis) const;
  /// Discrete div V per active cell, in active-cell order.
  Eigen::VectorXd divergence() const;
  /// Right-hand side of L chi = b with L = -h^2 * Laplacian.
  const Eigen::VectorXd& rhs() const { return rhs_; }
  /// y = L x, L the band graph Laplacian (degree minus adjacency).
  void apply_laplacian(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

  int component_count() const { return component_count_; }
  std::int32_t component_of(std::int32_t cell) const { return component_[cell]; }

  /// Solves for the indicator; throws SolverNotConverged on failure.
  KrylovResult solve(bool record_history = false);
  const Eigen::VectorXd& indicator() const { return chi_; }

  /// Trilinear indicator value at `p`; NaN where the stencil leaves the band.
  double sample(const Point3& p) const;
  /// Mean sampled indicator over the input points of each band component.
  const std::vector<double>& isolevels() const { return iso_; }

  /// Marching cubes over cubes whose eight corner cells are active. Faces are
  /// wound so their normals point along the input normals.
  TriangleMesh extract() const;

 private:
  static std::uint64_t pack(const Index3& c);
  std::int32_t neighbor(std::int32_t cell, int dir) const { return nbr_[6 * cell + dir]; }
  Eigen::Vector3d lattice_coords(const Point3& p) const { return (p - origin_) / h_; }

  PoissonConfig cfg_;
  std::vector<Point3> samples_;
  Point3 origin_;
  double h_ = 0.0;

  std::vector<Index3> cells_;
  std::unordered_map<std::uint64_t, std::int32_t> lookup_;
  // Six neighbours per active cell in order -x +x -y +y -z +z, -1 if absent.
  std::vector<std::int32_t> nbr_;
  // Dimensionless face flux h*V for the face on the lower side of each cell
  // along each axis (the face shared with cell - e_axis).
  std::vector<std::array<double, 3>> flux_;
  std::vector<std::int32_t> component_;
  int component_count_ = 0;

  Eigen::VectorXd rhs_;
  Eigen::VectorXd chi_;
  std::vector<double> iso_;
};

/// Full reconstruction: build, solve, pick isolevels, extract and clean.
/// Throws kInsufficientPoints below 100 points.
TriangleMesh poisson_reconstruct(const OrientedPointSet& input, const PoissonConfig& cfg);

}  // namespace wildocc::recon
