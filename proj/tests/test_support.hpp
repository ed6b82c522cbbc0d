#pragma once

#include <cmath>

#include "flowtopo/objective.hpp"
#include "flowtopo/state.hpp"

namespace ftest {

using namespace flowtopo;

struct Fixture {
  Mesh mesh;
  FunctionSpace velocity;
  FunctionSpace pressure;
  FunctionSpace design;

  Fixture(int nx, int ny, double w = 1.0, double h = 1.0)
      : mesh(Mesh::structured(nx, ny, w, h)),
        velocity(mesh, SpaceKind::VelocityP2),
        pressure(mesh, SpaceKind::PressureP1),
        design(mesh, SpaceKind::DesignP1) {}

  Field uniform_phi(double v) const {
    Field phi(design);
    phi.coeff.setConstant(v);
    return phi;
  }

  StateProblem problem(double mu = 1.0) const {
    StateProblem p;
    p.velocity = &velocity;
    p.pressure = &pressure;
    p.design = &design;
    p.mu = mu;
    p.phi = uniform_phi(1.0);
    p.alpha.a0 = 0.0;  // plain Navier-Stokes unless configured
    return p;
  }
};

inline BoundaryData poiseuille_boundary(double width, double height, double peak = 1.0) {
  BoundaryData g;
  g.is_zero = false;
  g.value = [=](const Vec2& x) {
    const double tol = 1e-12;
    if (x.x() < tol || x.x() > width - tol) {
      const double yn = x.y() / height;
      return Vec2(4.0 * peak * yn * (1.0 - yn), 0.0);
    }
    return Vec2(0.0, 0.0);
  };
  return g;
}

// center-half in/outflow channel (the straight-pipe benchmark)
inline BoundaryData pipe_boundary(double width, double height, double peak = 1.0) {
  BoundaryData g;
  g.is_zero = false;
  g.value = [=](const Vec2& x) {
    const double tol = 1e-12;
    const double a = 0.25 * height, b = 0.75 * height;
    if (x.x() < tol || x.x() > width - tol) {
      if (x.y() <= a || x.y() >= b) return Vec2(0.0, 0.0);
      const double m = b - a;
      return Vec2(4.0 * peak * (x.y() - a) * (b - x.y()) / (m * m), 0.0);
    }
    return Vec2(0.0, 0.0);
  };
  return g;
}

inline BodyForce constant_force(double fx, double fy) {
  BodyForce f;
  f.is_zero = false;
  f.value = [=](const Vec2&) { return Vec2(fx, fy); };
  f.jacobian = [](const Vec2&) { return Mat2::Zero(); };
  return f;
}

// rotational body force (y, 0): not a gradient, so it actually drives flow
inline BodyForce shear_force(double amp = 1.0) {
  BodyForce f;
  f.is_zero = false;
  f.value = [=](const Vec2& x) { return Vec2(amp * x.y(), 0.0); };
  f.jacobian = [=](const Vec2&) {
    Mat2 J = Mat2::Zero();
    J(0, 1) = amp;
    return J;
  };
  return f;
}

inline ObjectiveSpec potential_power_spec(const StateProblem& prob, double gamma = 1.0) {
  ObjectiveSpec spec;
  spec.gamma = gamma;
  spec.quad_degree = prob.options.quad_degree;
  spec.integrand = std::make_shared<TotalPotentialPower>(prob.mu, prob.force);
  return spec;
}

}  // namespace ftest
