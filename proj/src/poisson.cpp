#include "wildocc/recon/poisson.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include "mc_tables.hpp"
#include "wildocc/label/kdtree.hpp"

namespace wildocc::recon {

namespace {

constexpr std::int64_t kKeyOffset = 1 << 20;
constexpr int kCornerOffsets[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                      {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeCorners[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                     {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

void sort_unique(std::vector<std::uint64_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

Index3 unpack(std::uint64_t key) {
  const auto mask = (std::uint64_t{1} << 21) - 1;
  return {static_cast<int>(static_cast<std::int64_t>((key >> 42) & mask) - kKeyOffset),
          static_cast<int>(static_cast<std::int64_t>((key >> 21) & mask) - kKeyOffset),
          static_cast<int>(static_cast<std::int64_t>(key & mask) - kKeyOffset)};
}

}  // namespace

void PoissonConfig::validate() const {
  if (depth < 3 || depth > 13) {
    throw Error(ErrorKind::kPrecondition, "Poisson depth must be in [3, 13], got " +
                                              std::to_string(depth));
  }
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) {
    throw Error(ErrorKind::kPrecondition, "cg_tol must lie in (0, 1)");
  }
  if (cg_max_iters < 1) throw Error(ErrorKind::kPrecondition, "cg_max_iters must be positive");
  if (!(splat_radius >= 1.0)) throw Error(ErrorKind::kPrecondition, "splat_radius must be >= 1");
  if (density_k < 1) throw Error(ErrorKind::kPrecondition, "density_k must be positive");
}

std::uint64_t PoissonSystem::pack(const Index3& c) {
  return (static_cast<std::uint64_t>(c[0] + kKeyOffset) << 42) |
         (static_cast<std::uint64_t>(c[1] + kKeyOffset) << 21) |
         static_cast<std::uint64_t>(c[2] + kKeyOffset);
}

PoissonSystem::PoissonSystem(const OrientedPointSet& input, const PoissonConfig& cfg)
    : cfg_(cfg), samples_(input.points) {
  cfg_.validate();
  input.validate();
  if (input.size() < 100) {
    throw Error(ErrorKind::kInsufficientPoints,
                "Poisson reconstruction needs at least 100 points, got " +
                    std::to_string(input.size()));
  }

  // Padded bounding cube.
  Point3 lo = input.points.front(), hi = lo;
  for (const auto& p : input.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if (cfg_.domain && !cfg_.domain->isEmpty()) {
    lo = lo.cwiseMin(cfg_.domain->min());
    hi = hi.cwiseMax(cfg_.domain->max());
  }
  const double extent = (hi - lo).maxCoeff();
  if (!(extent > 0.0)) throw Error(ErrorKind::kInsufficientPoints, "all samples coincide");
  const double side = extent * 1.05;
  origin_ = 0.5 * (lo + hi) - Point3::Constant(0.5 * side);
  h_ = side / static_cast<double>(1 << cfg_.depth);

  // Active band: cells within ceil(splat_radius) of a sample's cell, plus a
  // one-cell ring. The cube dilation is separable, so do it axis by axis.
  std::vector<std::uint64_t> keys;
  keys.reserve(samples_.size());
  for (const auto& p : samples_) {
    const Eigen::Vector3d u = lattice_coords(p);
    keys.push_back(pack({static_cast<int>(std::floor(u.x())), static_cast<int>(std::floor(u.y())),
                         static_cast<int>(std::floor(u.z()))}));
  }
  sort_unique(keys);
  const int reach = static_cast<int>(std::ceil(cfg_.splat_radius)) + 1;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<std::uint64_t> grown;
    grown.reserve(keys.size() * (2 * reach + 1));
    for (const auto key : keys) {
      Index3 c = unpack(key);
      const int base = c[axis];
      for (int d = -reach; d <= reach; ++d) {
        c[axis] = base + d;
        grown.push_back(pack(c));
      }
    }
    sort_unique(grown);
    keys.swap(grown);
  }

  cells_.reserve(keys.size());
  lookup_.reserve(keys.size() * 2);
  for (const auto key : keys) {
    lookup_.emplace(key, static_cast<std::int32_t>(cells_.size()));
    cells_.push_back(unpack(key));
  }
  nbr_.assign(6 * cells_.size(), -1);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int axis = 0; axis < 3; ++axis) {
      for (int s = 0; s < 2; ++s) {
        Index3 n = cells_[c];
        n[axis] += s == 0 ? -1 : 1;
        if (auto it = lookup_.find(pack(n)); it != lookup_.end()) {
          nbr_[6 * c + 2 * axis + s] = it->second;
        }
      }
    }
  }

  // Per-sample area from the k-th neighbour distance.
  std::vector<double> area(samples_.size());
  {
    const KdTree tree(samples_);
    const int k = std::min<int>(cfg_.density_k, static_cast<int>(samples_.size()) - 1);
    std::vector<Neighbor> nbrs;
    for (std::size_t s = 0; s < samples_.size(); ++s) {
      tree.knn(samples_[s], k + 1, nbrs);
      area[s] = std::numbers::pi * nbrs.back().distance_sq / k;
    }
  }

  // Splat normals onto the staggered face lattice. The face on the lower
  // side of cell idx along `axis` sits at idx + 0.5 - 0.5 * e_axis.
  flux_.assign(cells_.size(), {0.0, 0.0, 0.0});
  const double inv_h2 = 1.0 / (h_ * h_);
  for (std::size_t s = 0; s < samples_.size(); ++s) {
    const Eigen::Vector3d u = lattice_coords(samples_[s]);
    const Eigen::Vector3d& n = input.normals[s];
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Vector3d g = u - Eigen::Vector3d::Constant(0.5);
      g[axis] += 0.5;
      const Index3 base{static_cast<int>(std::floor(g.x())), static_cast<int>(std::floor(g.y())),
                        static_cast<int>(std::floor(g.z()))};
      const Eigen::Vector3d frac(g.x() - base[0], g.y() - base[1], g.z() - base[2]);
      const double amount = n[axis] * area[s] * inv_h2;
      for (const auto& o : kCornerOffsets) {
        const double w = (o[0] ? frac.x() : 1.0 - frac.x()) * (o[1] ? frac.y() : 1.0 - frac.y()) *
                         (o[2] ? frac.z() : 1.0 - frac.z());
        const Index3 face{base[0] + o[0], base[1] + o[1], base[2] + o[2]};
        // Both cells of a splatted face lie within one cell of the sample,
        // hence inside the band.
        flux_[lookup_.at(pack(face))][axis] += w * amount;
      }
    }
  }

  rhs_.setZero(static_cast<Eigen::Index>(cells_.size()));
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int axis = 0; axis < 3; ++axis) {
      if (neighbor(static_cast<std::int32_t>(c), 2 * axis) >= 0) rhs_[c] += flux_[c][axis];
      const std::int32_t up = neighbor(static_cast<std::int32_t>(c), 2 * axis + 1);
      if (up >= 0) rhs_[c] -= flux_[up][axis];
    }
  }

  // Connected components of the band; each carries its own null vector.
  component_.assign(cells_.size(), -1);
  std::vector<std::int32_t> stack;
  for (std::size_t seed = 0; seed < cells_.size(); ++seed) {
    if (component_[seed] >= 0) continue;
    component_[seed] = component_count_;
    stack.push_back(static_cast<std::int32_t>(seed));
    while (!stack.empty()) {
      const std::int32_t c = stack.back();
      stack.pop_back();
      for (int d = 0; d < 6; ++d) {
        const std::int32_t n = neighbor(c, d);
        if (n >= 0 && component_[n] < 0) {
          component_[n] = component_count_;
          stack.push_back(n);
        }
      }
    }
    ++component_count_;
  }
  // The right-hand side sums to zero per component up to rounding; remove
  // the residue so the singular system is exactly consistent.
  std::vector<double> sum(component_count_, 0.0);
  std::vector<std::size_t> count(component_count_, 0);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    sum[component_[c]] += rhs_[c];
    ++count[component_[c]];
  }
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    rhs_[c] -= sum[component_[c]] / static_cast<double>(count[component_[c]]);
  }
}

std::optional<std::int32_t> PoissonSystem::find(const Index3& cell) const {
  if (auto it = lookup_.find(pack(cell)); it != lookup_.end()) return it->second;
  return std::nullopt;
}

Point3 PoissonSystem::cell_center(const Index3& cell) const {
  return origin_ + h_ * Point3(cell[0] + 0.5, cell[1] + 0.5, cell[2] + 0.5);
}

double PoissonSystem::face_field(const Index3& upper, int axis) const {
  const auto up = find(upper);
  if (!up || neighbor(*up, 2 * axis) < 0) return 0.0;
  return flux_[*up][axis] / h_;
}

Eigen::VectorXd PoissonSystem::divergence() const {
  Eigen::VectorXd div = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells_.size()));
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int axis = 0; axis < 3; ++axis) {
      const auto ci = static_cast<std::int32_t>(c);
      if (neighbor(ci, 2 * axis) >= 0) div[ci] -= flux_[c][axis];
      const std::int32_t up = neighbor(ci, 2 * axis + 1);
      if (up >= 0) div[ci] += flux_[up][axis];
    }
  }
  return div / (h_ * h_);
}

void PoissonSystem::apply_laplacian(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const auto n = static_cast<std::int32_t>(cells_.size());
  y.resize(n);
  for (std::int32_t c = 0; c < n; ++c) {
    const std::int32_t* nb = &nbr_[6 * static_cast<std::size_t>(c)];
    double acc = 0.0;
    for (int d = 0; d < 6; ++d) {
      if (nb[d] >= 0) acc += x[c] - x[nb[d]];
    }
    y[c] = acc;
  }
}

KrylovResult PoissonSystem::solve(bool record_history) {
  chi_.setZero(static_cast<Eigen::Index>(cells_.size()));
  auto op = [this](const Eigen::VectorXd& x, Eigen::VectorXd& y) { apply_laplacian(x, y); };
  KrylovResult res =
      cfg_.solver == KrylovMethod::kConjugateResidual
          ? conjugate_residual<double>(op, rhs_, chi_, cfg_.cg_max_iters, cfg_.cg_tol, record_history)
          : conjugate_gradient<double>(op, rhs_, chi_, cfg_.cg_max_iters, cfg_.cg_tol, record_history);
  if (!res.converged) throw SolverNotConverged(res.relative_residual, res.iterations);

  std::vector<double> sum(component_count_, 0.0);
  std::vector<std::size_t> count(component_count_, 0);
  for (const auto& p : samples_) {
    const Eigen::Vector3d u = lattice_coords(p);
    const auto cell = find({static_cast<int>(std::floor(u.x())), static_cast<int>(std::floor(u.y())),
                            static_cast<int>(std::floor(u.z()))});
    const double v = sample(p);
    if (!cell || !std::isfinite(v)) continue;
    sum[component_[*cell]] += v;
    ++count[component_[*cell]];
  }
  iso_.assign(component_count_, 0.0);
  for (int c = 0; c < component_count_; ++c) {
    if (count[c] > 0) iso_[c] = sum[c] / static_cast<double>(count[c]);
  }
  return res;
}

double PoissonSystem::sample(const Point3& p) const {
  if (chi_.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::Vector3d g = lattice_coords(p) - Eigen::Vector3d::Constant(0.5);
  const Index3 base{static_cast<int>(std::floor(g.x())), static_cast<int>(std::floor(g.y())),
                    static_cast<int>(std::floor(g.z()))};
  const Eigen::Vector3d frac(g.x() - base[0], g.y() - base[1], g.z() - base[2]);
  double v = 0.0;
  for (const auto& o : kCornerOffsets) {
    const auto cell = find({base[0] + o[0], base[1] + o[1], base[2] + o[2]});
    if (!cell) return std::numeric_limits<double>::quiet_NaN();
    const double w = (o[0] ? frac.x() : 1.0 - frac.x()) * (o[1] ? frac.y() : 1.0 - frac.y()) *
                     (o[2] ? frac.z() : 1.0 - frac.z());
    v += w * chi_[*cell];
  }
  return v;
}

TriangleMesh PoissonSystem::extract() const {
  TriangleMesh mesh;
  if (chi_.size() == 0) return mesh;
  std::unordered_map<std::int64_t, std::int32_t> edge_vertex;
  std::array<std::int32_t, 8> corner{};
  std::array<double, 8> value{};
  std::array<std::int32_t, 12> vid{};

  for (std::int32_t c = 0; c < static_cast<std::int32_t>(cells_.size()); ++c) {
    corner[0] = c;
    corner[1] = neighbor(c, 1);
    corner[3] = neighbor(c, 3);
    corner[4] = neighbor(c, 5);
    if (corner[1] < 0 || corner[3] < 0 || corner[4] < 0) continue;
    corner[2] = neighbor(corner[1], 3);
    corner[5] = neighbor(corner[1], 5);
    corner[7] = neighbor(corner[3], 5);
    if (corner[2] < 0 || corner[5] < 0 || corner[7] < 0) continue;
    corner[6] = neighbor(corner[2], 5);
    if (corner[6] < 0) continue;

    const double iso = iso_[component_[c]];
    int case_index = 0;
    for (int i = 0; i < 8; ++i) {
      value[i] = chi_[corner[i]];
      if (value[i] < iso) case_index |= 1 << i;
    }
    if (case_index == 0 || case_index == 255) continue;

    const int* tris = detail::kTriTable[case_index];
    for (int t = 0; tris[t] >= 0; ++t) {
      const int e = tris[t];
      const int a = kEdgeCorners[e][0], b = kEdgeCorners[e][1];
      int axis = 0;
      while (kCornerOffsets[a][axis] == kCornerOffsets[b][axis]) ++axis;
      const int lower = kCornerOffsets[a][axis] < kCornerOffsets[b][axis] ? a : b;
      const std::int64_t key = static_cast<std::int64_t>(corner[lower]) * 3 + axis;
      auto [it, inserted] = edge_vertex.try_emplace(key, 0);
      if (inserted) {
        const double da = value[a], db = value[b];
        double s = da == db ? 0.5 : (iso - da) / (db - da);
        s = std::clamp(s, 0.0, 1.0);
        const Point3 pa = cell_center(cells_[corner[a]]);
        const Point3 pb = cell_center(cells_[corner[b]]);
        it->second = static_cast<std::int32_t>(mesh.vertices.size());
        mesh.vertices.push_back(pa + s * (pb - pa));
      }
      vid[t % 3] = it->second;
      if (t % 3 == 2) mesh.triangles.push_back({vid[0], vid[2], vid[1]});
    }
  }
  return mesh;
}

TriangleMesh poisson_reconstruct(const OrientedPointSet& input, const PoissonConfig& cfg) {
  PoissonSystem system(input, cfg);
  system.solve();
  return clean_mesh(system.extract());
}

}  // namespace wildocc::recon
