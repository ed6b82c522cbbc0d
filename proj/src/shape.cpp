#include "flowtopo/shape.hpp"

#include <cmath>

namespace flowtopo {

void validate_design_velocity(const DesignVelocity& V, const Mesh& mesh, const BoundaryData* g) {
  const auto& rule = line_rule(6);
  for (const auto& be : mesh.boundary_edges()) {
    const Vec2 a = mesh.vertex(be.v0);
    const Vec2 b = mesh.vertex(be.v1);
    for (const auto& q : rule) {
      const Vec2 x = a + q.s * (b - a);
      const Vec2 v = V.value(x);
      if (std::abs(v.dot(be.normal)) > 1e-10)
        throw std::invalid_argument("design velocity: V.n != 0 on the boundary (V2)");
      if (g != nullptr && !g->is_zero && g->value(x).norm() > 1e-14 && v.norm() > 1e-10)
        throw std::invalid_argument("design velocity: V != 0 where g != 0 (V3)");
    }
  }
}

namespace {

Vec2 rk4_flow(const DesignVelocity& V, const Vec2& x0, double t, int substeps, double sign) {
  Vec2 x = x0;
  const double dt = t / substeps;
  for (int k = 0; k < substeps; ++k) {
    const Vec2 k1 = sign * V.value(x);
    const Vec2 k2 = sign * V.value(x + 0.5 * dt * k1);
    const Vec2 k3 = sign * V.value(x + 0.5 * dt * k2);
    const Vec2 k4 = sign * V.value(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace

Vec2 TransportFlow::forward(const Vec2& x, double t) const {
  return rk4_flow(*V, x, t, substeps, 1.0);
}

Vec2 TransportFlow::backward(const Vec2& x, double t) const {
  // T_t^{-1} is the time-t flow of -V for autonomous fields
  return rk4_flow(*V, x, t, substeps, -1.0);
}

PhaseField transport_design(const PhaseField& phase, const TransportFlow& flow, double t) {
  const FunctionSpace& s = *phase.phi.space;
  PhaseField out = phase;
  if (t == 0.0) return out;
  for (int n = 0; n < s.num_scalar_nodes(); ++n) {
    const Vec2 y = flow.backward(s.node_coord(n), t);
    double v;
    try {
      v = phase.phi.value_scalar(y);
    } catch (const std::runtime_error&) {
      throw std::runtime_error("transport_design: node flowed outside the closed domain");
    }
    out.phi.coeff[n] = std::min(1.0, std::max(-1.0, v));
  }
  return out;
}

LinearizedGeometric solve_linearized_geometric(const StateProblem& prob,
                                               const StateSolution& state,
                                               const DesignVelocity& V) {
  if (state.margin >= 1.0)
    throw std::runtime_error("linearized geometric: margin >= 1, operator not certified");
  const FunctionSpace& vel = *prob.velocity;
  const FunctionSpace& pres = *prob.pressure;
  const int deg = prob.options.quad_degree;
  const double mu = prob.mu;
  const kernels::AlphaParams ap = prob.alpha_params();

  // velocity rhs: the nine geometric terms, split into z and Dz pairings
  Eigen::VectorXd rhs_v = assemble_velocity_functional(
      vel, deg, [&](int t, double xi, double eta, const Vec2& x, Vec2& fvec, Mat2& fmat) {
        const Vec2 u = eval_vector(state.u, t, xi, eta);
        const Mat2 Du = eval_vector_jacobian(state.u, t, xi, eta);
        const Mat2 DV = V.jacobian(x);
        const double divV = DV.trace();
        const Vec2 gdiv = V.grad_div(x);
        const auto H = V.hessian(x);
        double al = 0.0;
        double ph = std::min(1.0, std::max(-1.0, eval_scalar(prob.phi, t, xi, eta)));
        kernels::alpha_eval(ap, &ph, &al, 1);

        fvec = Vec2::Zero();
        fmat = Mat2::Zero();

        // (1) mu DV^T grad u : grad z  and  (2) mu grad u : DV^T grad z
        fmat += mu * (Du * DV);
        fmat += mu * (Du * DV.transpose());
        // (3) mu grad u : grad(div V z - DV z)
        fvec += mu * (Du * gdiv);
        Vec2 hterm;
        for (int kk = 0; kk < 2; ++kk) {
          double s = 0.0;
          for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) s += Du(j, i) * H[j](i, kk);
          hterm[kk] = s;
        }
        fvec -= mu * hterm;
        fmat += mu * divV * Du;
        fmat -= mu * (DV.transpose() * Du);
        // (4) - mu (grad u : grad z) div V
        fmat -= mu * divV * Du;
        // (5) b(DV u, u, z)
        fvec += Du * (DV * u);
        // (6) - b(u, u, DV z)
        fvec -= DV.transpose() * (Du * u);
        // (7) (grad f . V) . z and (8) f . DV z
        if (!prob.force.is_zero) {
          fvec += prob.force.jacobian(x) * V.value(x);
          fvec += DV.transpose() * prob.force.value(x);
        }
        // (9) - alpha(phi) u . DV z
        fvec -= al * (DV.transpose() * u);
      });

  // divergence data: div udot = Du : DV = tr(Du DV)
  Eigen::VectorXd rhs_p = assemble_scalar_functional(
      pres, deg, [&](int t, double xi, double eta, const Vec2& x, double& a, Vec2& b) {
        const Mat2 Du = eval_vector_jacobian(state.u, t, xi, eta);
        a = (Du * V.jacobian(x)).trace();
        b = Vec2::Zero();
      });

  detail::StateOperator op = detail::build_state_operator(prob);
  SpMat J = op.K_linear + assemble_convection(state.u, deg) +
            assemble_convection_transposed(state.u, deg);
  SpMat raw = compose_saddle(J, op.B);

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(op.layout.size());
  rhs.head(vel.ndof()) = rhs_v;
  // constraint rows carry -B, so the divergence data enters negated
  rhs.tail(pres.ndof()) = -rhs_p;
  for (int i = 0; i < op.layout.size(); ++i)
    if (op.layout.constrained[i]) rhs[i] = 0.0;

  SparseSolver solver;
  solver.factorize(eliminate(raw, op.layout.constrained));
  const Eigen::VectorXd x = solver.solve(rhs);

  LinearizedGeometric out;
  out.udot = Field(vel);
  out.udot.coeff = x.head(vel.ndof());
  Eigen::VectorXd res = rhs - raw * x;
  for (int i = 0; i < op.layout.size(); ++i)
    if (op.layout.constrained[i]) res[i] = 0.0;
  const double scale = std::sqrt(kernels::nrm2sq(rhs.data(), rhs.size()));
  out.residual = std::sqrt(kernels::nrm2sq(res.data(), res.size())) / (scale > 0 ? scale : 1.0);
  return out;
}

double eval_shape_derivative(const StateProblem& prob, const PhaseField& phase,
                             const StateSolution& state, const Field& udot,
                             const DesignVelocity& V, const ObjectiveSpec& spec) {
  const ObjectiveIntegrand& f = *spec.integrand;
  const kernels::AlphaParams ap = prob.alpha.params(phase.eps);
  const double gamma = spec.gamma;
  const double eps = phase.eps;

  return integrate(prob.velocity->mesh(), spec.quad_degree,
                   [&](int t, double xi, double eta, const Vec2& x) {
                     const Vec2 u = eval_vector(state.u, t, xi, eta);
                     const Mat2 Du = eval_vector_jacobian(state.u, t, xi, eta);
                     const Vec2 ud = eval_vector(udot, t, xi, eta);
                     const Mat2 Dud = eval_vector_jacobian(udot, t, xi, eta);
                     const Mat2 DV = V.jacobian(x);
                     const double divV = DV.trace();
                     const Vec2 gphi = eval_scalar_gradient(phase.phi, t, xi, eta);
                     double ph = std::min(1.0, std::max(-1.0, eval_scalar(phase.phi, t, xi, eta)));
                     double al = 0.0;
                     kernels::alpha_eval(ap, &ph, &al, 1);

                     double v = al * (u.dot(ud) + 0.5 * u.squaredNorm() * divV);

                     Vec2 dv;
                     Mat2 dA;
                     f.deriv(x, u, Du, dv, dA);
                     v += f.deriv_x(x, u, Du, V.value(x));
                     v += dv.dot(ud);
                     v += (dA.array() * (Dud - Du * DV).array()).sum();
                     v += f.value(x, u, Du) * divV;

                     const double psi = 0.5 * (1.0 - ph * ph);
                     v += (0.5 * gamma * eps * gphi.squaredNorm() + gamma / eps * psi) * divV;
                     v -= gamma * eps * gphi.dot(DV * gphi);
                     return v;
                   });
}

std::vector<double> optimality_residual_geometric(const StateProblem& prob,
                                                  const PhaseField& phase,
                                                  const StateSolution& state, double lambda,
                                                  const std::vector<DesignVelocity>& family,
                                                  const ObjectiveSpec& spec) {
  std::vector<double> out;
  out.reserve(family.size());
  for (const auto& V : family) {
    const LinearizedGeometric lin = solve_linearized_geometric(prob, state, V);
    const double dj = eval_shape_derivative(prob, phase, state, lin.udot, V, spec);
    const double vol_term =
        lambda * integrate(prob.velocity->mesh(), spec.quad_degree,
                           [&](int t, double xi, double eta, const Vec2& x) {
                             return eval_scalar(phase.phi, t, xi, eta) * V.div(x);
                           });
    out.push_back(dj + vol_term);
  }
  return out;
}

std::vector<EpsSweepRow> shape_derivative_eps_sweep(
    StateProblem& prob, const ObjectiveSpec& spec,
    const std::vector<std::pair<double, Field>>& eps_phi_levels, const DesignVelocity& V) {
  std::vector<EpsSweepRow> rows;
  for (const auto& [eps, phi] : eps_phi_levels) {
    prob.eps = eps;
    prob.phi = phi;
    const StateSolution state = solve_state(prob);
    const LinearizedGeometric lin = solve_linearized_geometric(prob, state, V);
    PhaseField phase{phi, eps, 0.0};
    rows.push_back({eps, eval_shape_derivative(prob, phase, state, lin.udot, V, spec)});
  }
  return rows;
}

DesignVelocity sine_velocity(const Mesh& mesh, double A, int a, int b, double B, int c, int d) {
  const double kxa = a * M_PI / mesh.width(), kyb = b * M_PI / mesh.height();
  const double kxc = c * M_PI / mesh.width(), kyd = d * M_PI / mesh.height();
  DesignVelocity V;
  V.value = [=](const Vec2& x) {
    return Vec2(A * std::sin(kxa * x.x()) * std::sin(kyb * x.y()),
                B * std::sin(kxc * x.x()) * std::sin(kyd * x.y()));
  };
  V.jacobian = [=](const Vec2& x) {
    Mat2 J;
    J(0, 0) = A * kxa * std::cos(kxa * x.x()) * std::sin(kyb * x.y());
    J(0, 1) = A * kyb * std::sin(kxa * x.x()) * std::cos(kyb * x.y());
    J(1, 0) = B * kxc * std::cos(kxc * x.x()) * std::sin(kyd * x.y());
    J(1, 1) = B * kyd * std::sin(kxc * x.x()) * std::cos(kyd * x.y());
    return J;
  };
  V.hessian = [=](const Vec2& x) {
    std::array<Mat2, 2> H;
    const double sx = std::sin(kxa * x.x()), cx = std::cos(kxa * x.x());
    const double sy = std::sin(kyb * x.y()), cy = std::cos(kyb * x.y());
    H[0](0, 0) = -A * kxa * kxa * sx * sy;
    H[0](0, 1) = A * kxa * kyb * cx * cy;
    H[0](1, 0) = H[0](0, 1);
    H[0](1, 1) = -A * kyb * kyb * sx * sy;
    const double sx2 = std::sin(kxc * x.x()), cx2 = std::cos(kxc * x.x());
    const double sy2 = std::sin(kyd * x.y()), cy2 = std::cos(kyd * x.y());
    H[1](0, 0) = -B * kxc * kxc * sx2 * sy2;
    H[1](0, 1) = B * kxc * kyd * cx2 * cy2;
    H[1](1, 0) = H[1](0, 1);
    H[1](1, 1) = -B * kyd * kyd * sx2 * sy2;
    return H;
  };
  return V;
}

std::vector<DesignVelocity> canonical_velocity_family(const Mesh& mesh, int count) {
  // single-component sine modes; all vanish identically on the boundary
  struct Mode {
    double A;
    int a, b;
    double B;
    int c, d;
  };
  static const Mode modes[8] = {
      {1, 1, 1, 0, 1, 1}, {0, 1, 1, 1, 1, 1}, {1, 1, 2, 0, 1, 1}, {0, 1, 1, 1, 2, 1},
      {1, 2, 1, 0, 1, 1}, {0, 1, 1, 1, 1, 2}, {1, 2, 2, 0, 1, 1}, {0, 1, 1, 1, 2, 2},
  };
  std::vector<DesignVelocity> fam;
  for (int k = 0; k < count && k < 8; ++k) {
    const Mode& m = modes[k];
    fam.push_back(sine_velocity(mesh, m.A, m.a, m.b, m.B, m.c, m.d));
  }
  return fam;
}

DesignVelocity plateau_translation(const Vec2& center, double r0, double r1, const Vec2& e) {
  // s(r) = 1 on [0, r0], smootherstep down to 0 on [r0, r1]
  auto s = [=](double r) {
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    const double xi = (r - r0) / (r1 - r0);
    return 1.0 - xi * xi * xi * (10.0 + xi * (-15.0 + 6.0 * xi));
  };
  auto ds = [=](double r) {
    if (r <= r0 || r >= r1) return 0.0;
    const double w = r1 - r0;
    const double xi = (r - r0) / w;
    return -30.0 * xi * xi * (1.0 - xi) * (1.0 - xi) / w;
  };
  auto dds = [=](double r) {
    if (r <= r0 || r >= r1) return 0.0;
    const double w = r1 - r0;
    const double xi = (r - r0) / w;
    return -60.0 * xi * (1.0 - xi) * (1.0 - 2.0 * xi) / (w * w);
  };
  DesignVelocity V;
  V.value = [=](const Vec2& x) { return Vec2(s((x - center).norm()) * e); };
  V.jacobian = [=](const Vec2& x) {
    const Vec2 d = x - center;
    const double r = d.norm();
    Mat2 J = Mat2::Zero();
    if (r <= r0 || r >= r1) return J;
    const Vec2 rhat = d / r;
    J = e * (ds(r) * rhat).transpose();
    return J;
  };
  V.hessian = [=](const Vec2& x) {
    std::array<Mat2, 2> H{Mat2::Zero(), Mat2::Zero()};
    const Vec2 d = x - center;
    const double r = d.norm();
    if (r <= r0 || r >= r1) return H;
    const Vec2 rhat = d / r;
    const Mat2 P = Mat2::Identity() - rhat * rhat.transpose();
    const Mat2 hs = dds(r) * rhat * rhat.transpose() + ds(r) / r * P;
    H[0] = e.x() * hs;
    H[1] = e.y() * hs;
    return H;
  };
  return V;
}

}  // namespace flowtopo
