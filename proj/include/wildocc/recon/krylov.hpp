#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

namespace wildocc::recon {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  /// ||r_i|| / ||b|| per iteration (index 0 = initial guess), when recorded.
  std::vector<double> history;
};

/// Plain conjugate gradient for symmetric positive (semi)definite operators.
/// `apply(x, y)` must compute y = A x. `x` holds the initial guess on entry.
template <typename Scalar, typename Apply>
KrylovResult conjugate_gradient(const Apply& apply, const VectorX<Scalar>& b, VectorX<Scalar>& x,
                                int max_iters, double tol, bool record_history = false) {
  KrylovResult res;
  const Scalar b_norm = b.norm();
  if (b_norm == Scalar(0)) {
    x.setZero();
    res.converged = true;
    if (record_history) res.history.push_back(0.0);
    return res;
  }
  VectorX<Scalar> ax(b.size());
  apply(x, ax);
  VectorX<Scalar> r = b - ax;
  VectorX<Scalar> p = r;
  VectorX<Scalar> ap(b.size());
  Scalar rr = r.squaredNorm();
  res.relative_residual = std::sqrt(static_cast<double>(rr)) / b_norm;
  if (record_history) res.history.push_back(res.relative_residual);
  while (res.iterations < max_iters && res.relative_residual > tol) {
    apply(p, ap);
    const Scalar pap = p.dot(ap);
    if (!(pap > Scalar(0))) break;
    const Scalar alpha = rr / pap;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    const Scalar rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++res.iterations;
    res.relative_residual = std::sqrt(static_cast<double>(rr)) / b_norm;
    if (record_history) res.history.push_back(res.relative_residual);
  }
  res.converged = res.relative_residual <= tol;
  return res;
}

/// Conjugate residual: the CG-family method that minimizes ||b - A x|| over
/// the Krylov space, so the residual norm never increases. Same cost as CG
/// (one operator application per iteration). Requires A symmetric.
template <typename Scalar, typename Apply>
KrylovResult conjugate_residual(const Apply& apply, const VectorX<Scalar>& b, VectorX<Scalar>& x,
                                int max_iters, double tol, bool record_history = false) {
  KrylovResult res;
  const Scalar b_norm = b.norm();
  if (b_norm == Scalar(0)) {
    x.setZero();
    res.converged = true;
    if (record_history) res.history.push_back(0.0);
    return res;
  }
  const auto n = b.size();
  VectorX<Scalar> ax(n);
  apply(x, ax);
  VectorX<Scalar> r = b - ax;
  VectorX<Scalar> ar(n);
  apply(r, ar);
  VectorX<Scalar> p = r;
  VectorX<Scalar> ap = ar;
  Scalar r_ar = r.dot(ar);
  res.relative_residual = static_cast<double>(r.norm() / b_norm);
  if (record_history) res.history.push_back(res.relative_residual);
  while (res.iterations < max_iters && res.relative_residual > tol) {
    const Scalar ap_ap = ap.squaredNorm();
    if (!(ap_ap > Scalar(0)) || !(r_ar > Scalar(0))) break;
    const Scalar alpha = r_ar / ap_ap;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    apply(r, ar);
    const Scalar r_ar_new = r.dot(ar);
    const Scalar beta = r_ar_new / r_ar;
    r_ar = r_ar_new;
    p = r + beta * p;
    ap = ar + beta * ap;
    ++res.iterations;
    res.relative_residual = static_cast<double>(r.norm() / b_norm);
    if (record_history) res.history.push_back(res.relative_residual);
  }
  res.converged = res.relative_residual <= tol;
  return res;
}

}  // namespace wildocc::recon
