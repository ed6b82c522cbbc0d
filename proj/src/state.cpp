#include "flowtopo/state.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace flowtopo {

BodyForce BodyForce::zero() {
  BodyForce f;
  f.value = [](const Vec2&) { return Vec2::Zero(); };
  f.jacobian = [](const Vec2&) { return Mat2::Zero(); };
  f.is_zero = true;
  return f;
}

BoundaryData BoundaryData::zero() {
  BoundaryData g;
  g.value = [](const Vec2&) { return Vec2::Zero(); };
  g.is_zero = true;
  return g;
}

void StateProblem::validate() const {
  if (!velocity || !pressure || !design) throw std::invalid_argument("state: missing spaces");
  if (!(mu > 0.0)) throw std::invalid_argument("state: viscosity must be positive");
  alpha.validate();
  if (!boundary.is_zero) {
    const double flux = boundary_flux(velocity->mesh(), boundary.value);
    if (std::abs(flux) > 1e-10)
      throw std::invalid_argument("state: boundary data violates zero net flux, |flux| = " +
                                  std::to_string(flux));
  }
}

double K_omega(double measure, int dim) {
  if (dim == 2) return 0.5 * std::sqrt(measure);
  if (dim == 3) return 2.0 * std::sqrt(2.0) * std::pow(measure, 1.0 / 6.0) / 3.0;
  throw std::invalid_argument("K_omega: dim must be 2 or 3");
}

double uniqueness_margin(const Field& u, double mu) {
  const double grad = seminorm_H1(u);
  return K_omega(u.space->mesh().measure(), 2) * grad / mu;
}

double alpha_weighted_inner(const Field& phi, const kernels::AlphaParams& ap, const Field& a,
                            const Field& b, int quad_degree) {
  return integrate(phi.space->mesh(), quad_degree, [&](int t, double xi, double eta, const Vec2&) {
    double al = 0.0;
    double ph = std::min(1.0, std::max(-1.0, eval_scalar(phi, t, xi, eta)));
    kernels::alpha_eval(ap, &ph, &al, 1);
    return al * eval_vector(a, t, xi, eta).dot(eval_vector(b, t, xi, eta));
  });
}

namespace {

Eigen::VectorXd boundary_values(const StateProblem& prob) {
  const FunctionSpace& vel = *prob.velocity;
  Eigen::VectorXd bc = Eigen::VectorXd::Zero(vel.ndof() + prob.pressure->ndof());
  if (prob.boundary.is_zero) return bc;
  for (int n = 0; n < vel.num_scalar_nodes(); ++n) {
    if (!vel.node_on_boundary(n)) continue;
    const Vec2 g = prob.boundary.value(vel.node_coord(n));
    bc[2 * n] = g.x();
    bc[2 * n + 1] = g.y();
  }
  return bc;
}

struct NonlinearWork {
  const StateProblem* prob;
  detail::StateOperator op;
  Eigen::VectorXd rhs;  // [force; 0]
  int nvel = 0, ntot = 0;

  SpMat raw_at(const Field& u, bool newton) const {
    SpMat K = op.K_linear + assemble_convection(u, prob->options.quad_degree);
    if (newton) K = K + assemble_convection_transposed(u, prob->options.quad_degree);
    return compose_saddle(K, op.B);
  }

  // residual of the nonlinear system at x = [u;p], constrained entries zeroed
  Eigen::VectorXd residual(const Eigen::VectorXd& x, const Field& u) const {
    SpMat raw = raw_at(u, false);
    return free_residual(raw, op.layout, rhs, x);
  }
};

Field vel_field_from(const StateProblem& prob, const Eigen::VectorXd& x) {
  Field u(*prob.velocity);
  u.coeff = x.head(prob.velocity->ndof());
  return u;
}

double vec_norm(const Eigen::VectorXd& v) {
  return std::sqrt(kernels::nrm2sq(v.data(), static_cast<std::size_t>(v.size())));
}

StateSolution solve_nonlinear(const StateProblem& prob, NonlinearWork& work,
                              const StateSolution* initial) {
  const SolverOptions& opt = prob.options;
  const int nvel = work.nvel;
  const int ntot = work.ntot;

  // start from the provided solution or from boundary values only
  Eigen::VectorXd x = Eigen::VectorXd::Zero(ntot);
  for (int i = 0; i < ntot; ++i)
    if (work.op.layout.constrained[i]) x[i] = work.op.layout.values[i];
  if (initial != nullptr) {
    x.head(nvel) = initial->u.coeff;
    x.segment(nvel, prob.pressure->ndof()) = initial->p.coeff;
    for (int i = 0; i < ntot; ++i)
      if (work.op.layout.constrained[i]) x[i] = work.op.layout.values[i];
  }

  Field u = vel_field_from(prob, x);
  Eigen::VectorXd r = work.residual(x, u);
  double rnorm = vec_norm(r);
  const double r0 = rnorm;
  const double target = opt.rtol * r0 + opt.atol;

  std::vector<double> history{rnorm};
  if (!std::isfinite(rnorm)) throw SolverError("state solver: NaN residual", history);
  bool newton_phase = false;
  int iter = 0;
  SparseSolver solver;

  while (rnorm > target) {
    if (iter >= opt.max_iter)
      throw SolverError("state solver: no convergence after max_iter", history);
    if (!newton_phase && rnorm <= opt.picard_switch * r0) newton_phase = true;

    if (!newton_phase) {
      // Picard (Oseen) step with damping on residual increase
      SpMat raw = work.raw_at(u, false);
      solver.factorize(eliminate(raw, work.op.layout.constrained));
      const Eigen::VectorXd xstar = solver.solve(constrain_rhs(raw, work.op.layout, work.rhs));
      double omega = 1.0;
      Eigen::VectorXd xbest = xstar;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 6; ++k) {
        Eigen::VectorXd xtrial = x + omega * (xstar - x);
        Field ut = vel_field_from(prob, xtrial);
        const double rn = vec_norm(work.residual(xtrial, ut));
        if (rn < best) {
          best = rn;
          xbest = xtrial;
        }
        if (rn < rnorm) break;
        omega *= 0.5;
      }
      x = xbest;
    } else {
      // Newton step with Armijo backtracking on the residual norm
      SpMat raw = work.raw_at(u, true);
      solver.factorize(eliminate(raw, work.op.layout.constrained));
      Eigen::VectorXd rconstrained = r;  // already zero at constrained entries
      const Eigen::VectorXd delta = solver.solve(rconstrained);
      double t = 1.0;
      const double f0 = rnorm * rnorm;
      Eigen::VectorXd xtrial;
      double rn = rnorm;
      for (int k = 0; k <= 30; ++k) {
        xtrial = x + t * delta;
        Field ut = vel_field_from(prob, xtrial);
        rn = vec_norm(work.residual(xtrial, ut));
        if (rn * rn <= (1.0 - 2.0 * opt.armijo_slope * t) * f0) break;
        t *= opt.armijo_factor;
        if (k == 30) throw SolverError("state solver: line search failed", history);
      }
      x = xtrial;
    }

    u = vel_field_from(prob, x);
    r = work.residual(x, u);
    rnorm = vec_norm(r);
    history.push_back(rnorm);
    if (!std::isfinite(rnorm)) throw SolverError("state solver: NaN residual", history);
    ++iter;
    if (opt.verbose) std::fprintf(stderr, "  [state] it %d residual %.3e\n", iter, rnorm);
  }

  StateSolution sol;
  sol.u = u;
  sol.p = Field(*prob.pressure);
  sol.p.coeff = x.segment(nvel, prob.pressure->ndof());
  // pressure gauge: zero mean (L2_0 normalization)
  Field pf = sol.p;
  const double pmean =
      integrate(prob.pressure->mesh(), 2,
                [&](int t, double xi, double eta, const Vec2&) { return eval_scalar(pf, t, xi, eta); }) /
      prob.pressure->mesh().measure();
  sol.p.coeff.array() -= pmean;
  sol.residual = rnorm;
  sol.history = std::move(history);
  sol.iterations = iter;
  sol.grad_norm = seminorm_H1(sol.u);
  sol.margin = K_omega(prob.velocity->mesh().measure(), 2) * sol.grad_norm / prob.mu;
  sol.margin_certified = sol.margin < 1.0;
  const Eigen::VectorXd divres = work.op.B * sol.u.coeff;
  const double uscale = vec_norm(sol.u.coeff);
  sol.div_residual = vec_norm(divres) / (uscale > 0 ? uscale : 1.0);
  return sol;
}

}  // namespace

namespace detail {

StateOperator build_state_operator(const StateProblem& prob,
                                   const std::vector<bool>* extra_vel_mask, bool include_alpha) {
  const FunctionSpace& vel = *prob.velocity;
  const FunctionSpace& pres = *prob.pressure;
  const int deg = prob.options.quad_degree;

  StateOperator op;
  op.K_linear = assemble_stiffness(vel, prob.mu, deg);
  if (include_alpha && prob.alpha.a0 > 0.0) {
    op.K_linear = op.K_linear + assemble_weighted_mass(vel, prob.phi, prob.alpha_params(), deg);
  }
  op.B = assemble_divergence(vel, pres, deg);

  op.layout.nvel = vel.ndof();
  op.layout.npres = pres.ndof();
  op.layout.constrained.assign(op.layout.size(), false);
  const auto& mask = vel.dirichlet_mask();
  for (int i = 0; i < vel.ndof(); ++i) op.layout.constrained[i] = mask[i];
  if (extra_vel_mask)
    for (int i = 0; i < vel.ndof(); ++i)
      if ((*extra_vel_mask)[i]) op.layout.constrained[i] = true;
  op.layout.constrained[vel.ndof()] = true;  // pin one pressure dof

  op.layout.values = Eigen::VectorXd::Zero(op.layout.size());

  if (!prob.force.is_zero) {
    auto f = prob.force.value;
    Eigen::VectorXd fv = assemble_velocity_functional(
        vel, deg, [&](int, double, double, const Vec2& x, Vec2& fvec, Mat2&) { fvec = f(x); });
    op.rhs_force = Eigen::VectorXd::Zero(op.layout.size());
    op.rhs_force.head(vel.ndof()) = fv;
  } else {
    op.rhs_force = Eigen::VectorXd::Zero(op.layout.size());
  }
  return op;
}

}  // namespace detail

Field lift_boundary_data(const StateProblem& prob) {
  prob.validate();
  if (prob.boundary.is_zero) return Field(*prob.velocity);

  StateProblem stokes = prob;
  stokes.alpha = AlphaSchedule{};
  stokes.alpha.a0 = 0.0;
  stokes.force = BodyForce::zero();

  // single Stokes solve (no convection) with trace g
  detail::StateOperator op = detail::build_state_operator(stokes, nullptr, false);
  op.layout.values.head(stokes.velocity->ndof()) =
      boundary_values(stokes).head(stokes.velocity->ndof());
  SpMat raw = compose_saddle(op.K_linear, op.B);
  SparseSolver solver;
  solver.factorize(eliminate(raw, op.layout.constrained));
  const Eigen::VectorXd x = solver.solve(constrain_rhs(raw, op.layout, op.rhs_force));
  Field lift(*prob.velocity);
  lift.coeff = x.head(prob.velocity->ndof());
  return lift;
}

StateSolution solve_state(const StateProblem& prob, const StateSolution* initial) {
  prob.validate();
  detail::StateOperator op = detail::build_state_operator(prob);
  NonlinearWork work{&prob, std::move(op), Eigen::VectorXd(), prob.velocity->ndof(),
                     prob.velocity->ndof() + prob.pressure->ndof()};
  work.op.layout.values.head(work.nvel) = boundary_values(prob).head(work.nvel);
  work.rhs = work.op.rhs_force;
  return solve_nonlinear(prob, work, initial);
}

StateSolution solve_sharp_state(const StateProblem& prob, const Field& sharp_mask) {
  prob.validate();
  if (sharp_mask.space->kind() != SpaceKind::DesignP1)
    throw std::invalid_argument("sharp state: mask must live on the design space");
  const FunctionSpace& vel = *prob.velocity;
  const Mesh& mesh = vel.mesh();

  // element is solid when all three vertices carry mask -1
  std::vector<bool> elem_fluid(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.tri(t);
    elem_fluid[t] = sharp_mask.coeff[tri[0]] > 0 || sharp_mask.coeff[tri[1]] > 0 ||
                    sharp_mask.coeff[tri[2]] > 0;
  }
  std::vector<bool> node_has_fluid(vel.num_scalar_nodes(), false);
  int nodes[6];
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!elem_fluid[t]) continue;
    vel.element_nodes(t, nodes);
    for (int k = 0; k < 6; ++k) node_has_fluid[nodes[k]] = true;
  }
  std::vector<bool> vel_mask(vel.ndof(), false);
  for (int n = 0; n < vel.num_scalar_nodes(); ++n) {
    if (node_has_fluid[n]) continue;
    if (vel.node_on_boundary(n) && !prob.boundary.is_zero) {
      if (prob.boundary.value(vel.node_coord(n)).norm() > 1e-14)
        throw std::invalid_argument(
            "sharp state: U^phi empty (nonzero boundary data on solid region)");
    }
    vel_mask[2 * n] = true;
    vel_mask[2 * n + 1] = true;
  }

  StateProblem sharp = prob;
  sharp.alpha = AlphaSchedule{};
  sharp.alpha.a0 = 0.0;  // no Brinkman term in the sharp problem

  detail::StateOperator op = detail::build_state_operator(sharp, &vel_mask, false);

  // pressures with no fluid element in their support are decoupled
  std::vector<bool> pres_has_fluid(prob.pressure->ndof(), false);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!elem_fluid[t]) continue;
    const auto& tri = mesh.tri(t);
    for (int k = 0; k < 3; ++k) pres_has_fluid[tri[k]] = true;
  }
  for (int r = 0; r < prob.pressure->ndof(); ++r)
    if (!pres_has_fluid[r]) op.layout.constrained[vel.ndof() + r] = true;

  NonlinearWork work{&sharp, std::move(op), Eigen::VectorXd(), vel.ndof(),
                     vel.ndof() + prob.pressure->ndof()};
  work.op.layout.values.head(work.nvel) = boundary_values(sharp).head(work.nvel);
  // masked dofs keep value zero
  work.rhs = work.op.rhs_force;
  return solve_nonlinear(sharp, work, nullptr);
}

}  // namespace flowtopo
