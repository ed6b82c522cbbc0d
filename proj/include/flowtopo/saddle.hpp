#pragma once

#include <Eigen/SparseLU>

#include "flowtopo/fem.hpp"

namespace flowtopo {

// Velocity-pressure saddle systems [K B^T; B 0] with symmetric elimination of
// constrained DOFs (Dirichlet velocity values, pinned/decoupled pressures).
// Unknown ordering: velocity DOFs first, then pressure.
struct SaddleLayout {
  int nvel = 0;
  int npres = 0;
  std::vector<bool> constrained;  // size nvel + npres
  Eigen::VectorXd values;         // prescribed values at constrained entries

  int size() const { return nvel + npres; }
};

// Raw (unconstrained) composition of the blocks.
SpMat compose_saddle(const SpMat& K, const SpMat& B);

// Row/column elimination: constrained rows and columns are dropped and a unit
// diagonal inserted.
SpMat eliminate(const SpMat& raw, const std::vector<bool>& constrained);

// rhs for the eliminated system solving raw*x = rhs with x = values at
// constrained entries.
Eigen::VectorXd constrain_rhs(const SpMat& raw, const SaddleLayout& layout,
                              const Eigen::VectorXd& rhs);

// Residual rhs - raw*x with constrained entries zeroed.
Eigen::VectorXd free_residual(const SpMat& raw, const SaddleLayout& layout,
                              const Eigen::VectorXd& rhs, const Eigen::VectorXd& x);

class SparseSolver {
 public:
  void factorize(const SpMat& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool ready_ = false;
};

}  // namespace flowtopo
