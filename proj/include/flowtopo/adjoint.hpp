#pragma once

#include "flowtopo/objective.hpp"

namespace flowtopo {

struct AdjointSolution {
  Field q;
  Field pi;
  double residual = 0.0;
  bool margin_warning = false;  // state margin >= 1, invertibility uncertified
};

// Discrete adjoint of the reduced functional: with L the Newton operator at
// the converged state, q solves <L v, q> = DF(u)(v) + int alpha(phi) u.v for
// all discretely divergence-free v with zero trace. Sign convention locked by
// the finite-difference oracle: the reduced derivative pairs with -u.q.
AdjointSolution solve_adjoint(const StateProblem& prob, const StateSolution& state,
                              const ObjectiveSpec& spec);

enum class InnerProduct { L2, H1Weighted };

struct ReducedGradient {
  Field g;              // Riesz representative in the configured inner product
  Eigen::VectorXd ell;  // raw functional coefficients l(N_i)
  InnerProduct ip = InnerProduct::H1Weighted;
  double lambda = 0.0;  // volume multiplier bookkeeping (set by the optimizer)
};

// Dj_eps(phi)(dphi) = int alpha'(phi) dphi [ |u|^2/2 - u.q ]
//                   + gamma [ eps grad phi . grad dphi - phi dphi / eps ] dx.
ReducedGradient reduced_gradient(const StateProblem& prob, const StateSolution& state,
                                 const AdjointSolution& adjoint, const PhaseField& phase,
                                 const ObjectiveSpec& spec,
                                 InnerProduct ip = InnerProduct::H1Weighted);

// Pairing of the raw gradient functional with a Riesz representative is not
// needed for directions: <Dj, dphi> = ell . dphi_coeffs.
double gradient_pairing(const ReducedGradient& grad, const Field& dphi);

// Norm of phi - Proj_ad(phi - g - lambda), zero iff the discrete variational
// inequality holds. Implemented with the optimizer's projection.
double stationarity_residual(const ReducedGradient& grad, const PhaseField& phase);

// Control-to-state linearization: delta u for a design perturbation dphi
// (FD-free verification route; rhs -int alpha'(phi) dphi u . v).
Field solve_linearized_state(const StateProblem& prob, const StateSolution& state,
                             const Field& dphi);

}  // namespace flowtopo
