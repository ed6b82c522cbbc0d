#include "flowtopo/saddle.hpp"

#include <stdexcept>

namespace flowtopo {

SpMat compose_saddle(const SpMat& K, const SpMat& B) {
  // momentum row carries -B^T p (pressure enters as -int p div v); the
  // constraint row is negated likewise to keep the matrix symmetric
  const int nvel = static_cast<int>(K.rows());
  const int npres = static_cast<int>(B.rows());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(K.nonZeros() + 2 * B.nonZeros());
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      trip.emplace_back(nvel + it.row(), it.col(), -it.value());
      trip.emplace_back(it.col(), nvel + it.row(), -it.value());
    }
  SpMat s(nvel + npres, nvel + npres);
  s.setFromTriplets(trip.begin(), trip.end());
  s.makeCompressed();
  return s;
}

SpMat eliminate(const SpMat& raw, const std::vector<bool>& constrained) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(raw.nonZeros());
  for (int k = 0; k < raw.outerSize(); ++k)
    for (SpMat::InnerIterator it(raw, k); it; ++it) {
      if (constrained[it.row()] || constrained[it.col()]) continue;
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  for (int i = 0; i < raw.rows(); ++i)
    if (constrained[i]) trip.emplace_back(i, i, 1.0);
  SpMat s(raw.rows(), raw.cols());
  s.setFromTriplets(trip.begin(), trip.end());
  s.makeCompressed();
  return s;
}

Eigen::VectorXd constrain_rhs(const SpMat& raw, const SaddleLayout& layout,
                              const Eigen::VectorXd& rhs) {
  Eigen::VectorXd bc = Eigen::VectorXd::Zero(layout.size());
  for (int i = 0; i < layout.size(); ++i)
    if (layout.constrained[i]) bc[i] = layout.values[i];
  Eigen::VectorXd out = rhs - raw * bc;
  for (int i = 0; i < layout.size(); ++i)
    if (layout.constrained[i]) out[i] = layout.values[i];
  return out;
}

Eigen::VectorXd free_residual(const SpMat& raw, const SaddleLayout& layout,
                              const Eigen::VectorXd& rhs, const Eigen::VectorXd& x) {
  Eigen::VectorXd r = rhs - raw * x;
  for (int i = 0; i < layout.size(); ++i)
    if (layout.constrained[i]) r[i] = 0.0;
  return r;
}

void SparseSolver::factorize(const SpMat& a) {
  lu_.compute(a);
  ready_ = lu_.info() == Eigen::Success;
  if (!ready_) throw std::runtime_error("sparse factorization failed (singular system)");
}

Eigen::VectorXd SparseSolver::solve(const Eigen::VectorXd& rhs) const {
  if (!ready_) throw std::runtime_error("solve before factorize");
  Eigen::VectorXd x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) throw std::runtime_error("sparse solve failed");
  return x;
}

}  // namespace flowtopo
