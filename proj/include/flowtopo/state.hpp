#pragma once

#include <optional>

#include "flowtopo/alpha.hpp"
#include "flowtopo/fem.hpp"
#include "flowtopo/saddle.hpp"

namespace flowtopo {

struct BodyForce {
  std::function<Vec2(const Vec2&)> value;
  // (Df)_{ij} = d f_i / d x_j; needed by the geometric-variation terms
  std::function<Mat2(const Vec2&)> jacobian;

  static BodyForce zero();
  bool is_zero = false;
};

struct BoundaryData {
  std::function<Vec2(const Vec2&)> value;
  static BoundaryData zero();
  bool is_zero = false;
};

struct SolverOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  int max_iter = 50;
  int quad_degree = 6;
  double picard_switch = 0.1;   // switch to Newton after 10x residual reduction
  double armijo_slope = 1e-4;
  double armijo_factor = 0.5;
  bool verbose = false;
};

// Data of the Brinkman-penalized stationary Navier-Stokes problem: viscosity,
// body force, boundary trace with zero net flux, the design phi and the
// interpolation schedule at the current eps.
struct StateProblem {
  const FunctionSpace* velocity = nullptr;
  const FunctionSpace* pressure = nullptr;
  const FunctionSpace* design = nullptr;
  double mu = 1.0;
  BodyForce force = BodyForce::zero();
  BoundaryData boundary = BoundaryData::zero();
  Field phi;
  AlphaSchedule alpha;
  double eps = 0.1;
  SolverOptions options;

  kernels::AlphaParams alpha_params() const { return alpha.params(eps); }
  void validate() const;
};

struct StateSolution {
  Field u;
  Field p;
  double residual = 0.0;
  std::vector<double> history;
  int iterations = 0;
  double grad_norm = 0.0;           // ||grad u||_{L2}
  double margin = 0.0;              // K_Omega ||grad u|| / mu
  bool margin_certified = false;    // margin < 1
  double div_residual = 0.0;        // ||B u|| relative
};

struct SolverError : std::runtime_error {
  std::vector<double> history;
  SolverError(const std::string& what, std::vector<double> hist)
      : std::runtime_error(what), history(std::move(hist)) {}
};

// K_Omega from the trilinear continuity estimate: |Omega|^{1/2}/2 in 2d,
// 2 sqrt(2) |Omega|^{1/6} / 3 in 3d.
double K_omega(double measure, int dim = 2);
double uniqueness_margin(const Field& u, double mu);

// Divergence-free extension of the boundary data, realized as a Stokes solve.
Field lift_boundary_data(const StateProblem& prob);

StateSolution solve_state(const StateProblem& prob, const StateSolution* initial = nullptr);

// Sharp-interface state: velocity DOFs whose basis support lies entirely in
// {mask = -1} are constrained to zero (alpha is dropped). Pressure DOFs with
// no fluid element in their support are pinned.
StateSolution solve_sharp_state(const StateProblem& prob, const Field& sharp_mask);

// int alpha_eps(phi) a . b dx (velocity fields).
double alpha_weighted_inner(const Field& phi, const kernels::AlphaParams& ap, const Field& a,
                            const Field& b, int quad_degree = 6);

namespace detail {
// Shared by the adjoint and linearized solves: Newton operator at u with the
// saddle layout (Dirichlet mask, pinned pressure dof 0).
struct StateOperator {
  SpMat K_linear;  // alpha-mass + mu-stiffness
  SpMat B;
  SaddleLayout layout;
  Eigen::VectorXd rhs_force;  // body-force velocity functional, pressure zeros
};
StateOperator build_state_operator(const StateProblem& prob,
                                   const std::vector<bool>* extra_vel_mask = nullptr,
                                   bool include_alpha = true);
}  // namespace detail

}  // namespace flowtopo
