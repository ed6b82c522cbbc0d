#pragma once

#include "flowtopo/objective.hpp"

namespace flowtopo {

// Admissible design velocity V(0), supplied analytically with exact Jacobian
// (DV)_{ij} = dV_i/dx_j and exact second derivatives (the geometric rhs needs
// grad(div V) and grad(DV)). Autonomous fields only.
struct DesignVelocity {
  std::function<Vec2(const Vec2&)> value;
  std::function<Mat2(const Vec2&)> jacobian;
  // hess[c](i,j) = d^2 V_c / dx_i dx_j
  std::function<std::array<Mat2, 2>(const Vec2&)> hessian;

  double div(const Vec2& x) const { return jacobian(x).trace(); }
  Vec2 grad_div(const Vec2& x) const {
    const auto H = hessian(x);
    return Vec2(H[0](0, 0) + H[1](1, 0), H[0](0, 1) + H[1](1, 1));
  }
};

// (V2): V.n = 0 on the boundary; (V3): V = 0 wherever g != 0. Violations
// throw (checked at boundary quadrature points, tolerance 1e-10).
void validate_design_velocity(const DesignVelocity& V, const Mesh& mesh,
                              const BoundaryData* g = nullptr);

// Flow maps of the autonomous ODE dx/dt = V(x), integrated with RK4.
struct TransportFlow {
  const DesignVelocity* V = nullptr;
  int substeps = 32;

  Vec2 forward(const Vec2& x, double t) const;   // T_t(x)
  Vec2 backward(const Vec2& x, double t) const;  // T_t^{-1}(x)
};

// phi o T_t^{-1} sampled at the design nodes, re-clipped to [-1,1].
PhaseField transport_design(const PhaseField& phase, const TransportFlow& flow, double t);

struct LinearizedGeometric {
  Field udot;
  double residual = 0.0;
};

// Material derivative udot[V] of the state under the transformation flow:
// Newton operator on the left, the nine geometric terms on the right, and
// div udot = Du : DV(0) as divergence data.
LinearizedGeometric solve_linearized_geometric(const StateProblem& prob,
                                               const StateSolution& state,
                                               const DesignVelocity& V);

// Eulerian derivative d/dt|_0 j_eps(phi o T_t^{-1}).
double eval_shape_derivative(const StateProblem& prob, const PhaseField& phase,
                             const StateSolution& state, const Field& udot,
                             const DesignVelocity& V, const ObjectiveSpec& spec);

// Optimality residual r(V) = dj[V] + lambda int phi div V dx per test field.
std::vector<double> optimality_residual_geometric(const StateProblem& prob,
                                                  const PhaseField& phase,
                                                  const StateSolution& state, double lambda,
                                                  const std::vector<DesignVelocity>& family,
                                                  const ObjectiveSpec& spec);

struct EpsSweepRow {
  double eps = 0.0;
  double dj = 0.0;
};

// Shape derivative evaluated on stored continuation iterates per eps level.
std::vector<EpsSweepRow> shape_derivative_eps_sweep(
    StateProblem& prob, const ObjectiveSpec& spec,
    const std::vector<std::pair<double, Field>>& eps_phi_levels, const DesignVelocity& V);

// Product-of-sines fields (A sin(a pi x/W) sin(b pi y/H), B sin(c..) sin(d..))
// vanishing on the whole boundary, with exact derivatives.
DesignVelocity sine_velocity(const Mesh& mesh, double A, int a, int b, double B, int c, int d);
std::vector<DesignVelocity> canonical_velocity_family(const Mesh& mesh, int count = 8);

// C^2 plateau bump: e * s(|x-x0|) with s = 1 on r <= r0, 0 on r >= r1.
DesignVelocity plateau_translation(const Vec2& center, double r0, double r1, const Vec2& e);

}  // namespace flowtopo
