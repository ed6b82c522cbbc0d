#include "flowtopo/optimizer.hpp"

#include <cmath>
#include <cstdio>

namespace flowtopo {

Eigen::VectorXd design_lumped_mass(const FunctionSpace& s) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(s.ndof());
  const Mesh& mesh = s.mesh();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.tri(t);
    const double third = mesh.tri_area(t) / 3.0;
    for (int k = 0; k < 3; ++k) m[tri[k]] += third;
  }
  return m;
}

namespace {

double lumped_norm_sq(const Eigen::VectorXd& m, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += m[i] * v[i] * v[i];
  return s;
}

}  // namespace

double design_volume(const Field& phi) {
  const Eigen::VectorXd m = design_lumped_mass(*phi.space);
  return kernels::dot(m.data(), phi.coeff.data(), m.size());
}

ProjectionResult project_admissible(const Field& phi_raw, double beta) {
  const FunctionSpace& s = *phi_raw.space;
  const Eigen::VectorXd m = design_lumped_mass(s);
  const double vol_target = beta * s.mesh().measure();

  ProjectionResult out;
  out.phi = phi_raw;
  kernels::clip(-1.0, 1.0, out.phi.coeff.data(), out.phi.coeff.size());
  const double vol0 = kernels::dot(m.data(), out.phi.coeff.data(), m.size());
  if (vol0 <= vol_target) return out;

  auto volume_at = [&](double sigma) {
    double v = 0.0;
    for (int i = 0; i < phi_raw.coeff.size(); ++i)
      v += m[i] * std::min(1.0, std::max(-1.0, phi_raw.coeff[i] - sigma));
    return v;
  };
  double lo = 0.0, hi = phi_raw.coeff.maxCoeff() + 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (volume_at(mid) > vol_target)
      lo = mid;
    else
      hi = mid;
  }
  out.sigma = hi;
  for (int i = 0; i < phi_raw.coeff.size(); ++i)
    out.phi.coeff[i] = std::min(1.0, std::max(-1.0, phi_raw.coeff[i] - out.sigma));
  return out;
}

double stationarity_residual(const ReducedGradient& grad, const PhaseField& phase) {
  // the gradient enters through its lumped-L2 representative: in that metric
  // the projection is exact, so the residual vanishes exactly at discrete
  // solutions of the variational inequality (a Riesz representative in a
  // different inner product would leave a spurious gap at minimizers)
  const Eigen::VectorXd m = design_lumped_mass(*phase.phi.space);
  Field trial(*phase.phi.space);
  trial.coeff = phase.phi.coeff - grad.ell.cwiseQuotient(m);
  trial.coeff.array() -= grad.lambda;
  const ProjectionResult proj = project_admissible(trial, phase.beta);
  return std::sqrt(lumped_norm_sq(m, phase.phi.coeff - proj.phi.coeff));
}

namespace {

StepResult step_with_direction(const StateProblem& prob, const ObjectiveSpec& spec,
                               const PhaseField& phase, const StateSolution& state,
                               const JBreakdown& J, const Eigen::VectorXd& direction, double tau,
                               const OptimizerOptions& opt, const Eigen::VectorXd& m) {
  StepResult res;
  for (int h = 0; h <= opt.max_halvings; ++h, tau *= 0.5) {
    Field raw(*phase.phi.space);
    raw.coeff = phase.phi.coeff - tau * direction;
    ProjectionResult proj = project_admissible(raw, phase.beta);
    const Eigen::VectorXd dphi = proj.phi.coeff - phase.phi.coeff;
    const double dn2 = lumped_norm_sq(m, dphi);
    if (dn2 == 0.0) {
      // projected point coincides with the iterate; nothing to evaluate
      res.phase = phase;
      res.state = state;
      res.J = J;
      res.accepted = true;
      res.tau = tau;
      res.sigma = proj.sigma;
      return res;
    }
    StateProblem trial_prob = prob;
    trial_prob.phi = proj.phi;
    StateSolution trial_state;
    try {
      trial_state = solve_state(trial_prob, &state);
    } catch (const SolverError&) {
      continue;  // treat solver failure as a rejected step
    }
    PhaseField trial_phase{proj.phi, phase.eps, phase.beta};
    const JBreakdown trial_J = eval_J_eps(trial_phase, trial_state, trial_prob, spec);
    if (trial_J.total <= J.total - opt.c1 / tau * dn2) {
      res.phase = trial_phase;
      res.state = trial_state;
      res.J = trial_J;
      res.accepted = true;
      res.tau = tau;
      res.sigma = proj.sigma;
      return res;
    }
  }
  res.accepted = false;
  res.tau = tau;
  return res;
}

}  // namespace

StepResult step(const StateProblem& prob, const ObjectiveSpec& spec, const PhaseField& phase,
                const StateSolution& state, const JBreakdown& J, const ReducedGradient& grad,
                double tau, const OptimizerOptions& opt) {
  const Eigen::VectorXd m = design_lumped_mass(*phase.phi.space);
  StepResult res = step_with_direction(prob, spec, phase, state, J, grad.g.coeff, tau, opt, m);
  if (res.accepted || grad.ip == InnerProduct::L2) return res;
  // Once box/volume constraints activate, the smoothed direction projected in
  // the nodal metric can lose descent. The lumped-L2 representative is
  // metric-consistent with the projection and always descends away from
  // stationary points, so retry with it before reporting a stall.
  return step_with_direction(prob, spec, phase, state, J,
                             Eigen::VectorXd(grad.ell.cwiseQuotient(m)), tau, opt, m);
}

OptimizeResult run_optimization(StateProblem& prob, const ObjectiveSpec& spec,
                                const PhaseField& phi_init, const OptimizerOptions& opt) {
  OptimizeResult out;
  ProjectionResult proj = project_admissible(phi_init.phi, phi_init.beta);
  out.phase = PhaseField{proj.phi, phi_init.eps, phi_init.beta};
  prob.phi = out.phase.phi;
  prob.eps = out.phase.eps;

  out.state = solve_state(prob);
  out.J = eval_J_eps(out.phase, out.state, prob, spec);
  out.lambda = 0.0;

  double tau = opt.tau0;
  double stat0 = 0.0;
  out.termination = "max_outer";

  for (int k = 0; k < opt.max_outer; ++k) {
    const AdjointSolution adj = solve_adjoint(prob, out.state, spec);
    ReducedGradient grad = reduced_gradient(prob, out.state, adj, out.phase, spec, opt.ip);
    grad.lambda = out.lambda;
    out.stationarity = stationarity_residual(grad, out.phase);
    if (k == 0) stat0 = std::max(out.stationarity, 1e-300);

    OptimizeRecord rec;
    rec.iter = k;
    rec.J = out.J;
    rec.stationarity = out.stationarity;
    rec.lambda = out.lambda;
    rec.tau = tau;
    rec.volume = design_volume(out.phase.phi);
    rec.margin = out.state.margin;
    out.history.push_back(rec);
    if (opt.verbose)
      std::fprintf(stderr, "[opt] it %3d J %.8e stat %.3e lambda %.3e tau %.2e margin %.3f\n", k,
                   out.J.total, out.stationarity, out.lambda, tau, out.state.margin);

    if (out.stationarity <= std::max(opt.tol * stat0, opt.tol_abs)) {
      out.termination = "stationarity";
      break;
    }

    const double tau_try = std::min(2.0 * tau, opt.tau_max);
    StepResult sres = step(prob, spec, out.phase, out.state, out.J, grad, tau_try, opt);
    if (!sres.accepted) {
      out.termination = "stalled";
      break;
    }
    out.phase = sres.phase;
    out.state = sres.state;
    out.J = sres.J;
    tau = sres.tau;
    out.lambda = sres.sigma > 0.0 ? sres.sigma / sres.tau : 0.0;
    prob.phi = out.phase.phi;
  }
  return out;
}

Field extract_sharp_interface(const Field& phi) {
  Field mask(*phi.space);
  for (int i = 0; i < phi.coeff.size(); ++i) mask.coeff[i] = phi.coeff[i] >= 0.0 ? 1.0 : -1.0;
  return mask;
}

ContinuationResult run_continuation(StateProblem& prob, const ObjectiveSpec& spec,
                                    const PhaseField& phi_init, const ContinuationOptions& copt) {
  ContinuationResult out;
  const Mesh& mesh = prob.velocity->mesh();
  const double h = std::max(mesh.hx(), mesh.hy());

  PhaseField phase = phi_init;
  phase.eps = copt.eps_initial;
  for (int level = 0; level < copt.levels; ++level) {
    const double eps = copt.eps_initial / std::pow(2.0, level);
    if (M_PI * eps < copt.min_cells_per_interface * h)
      throw std::invalid_argument("continuation: interface at eps = " + std::to_string(eps) +
                                  " unresolved by the mesh (pi*eps < " +
                                  std::to_string(copt.min_cells_per_interface) + " cells)");
    phase.eps = eps;
    prob.eps = eps;

    ContinuationLevel lvl;
    lvl.eps = eps;
    lvl.abar = prob.alpha.abar(eps);
    lvl.result = run_optimization(prob, spec, phase, copt.opt);
    phase = lvl.result.phase;

    const Field mask = extract_sharp_interface(phase.phi);
    lvl.mismatch_l1 = sharp_mismatch_L1(phase, mask);
    lvl.mismatch_ratio = lvl.mismatch_l1 / eps;
    out.levels.push_back(std::move(lvl));
  }

  out.sharp_mask = extract_sharp_interface(phase.phi);
  out.j_eps_final = out.levels.back().result.J.total;
  out.j0 = eval_J0(prob, out.sharp_mask, spec);
  return out;
}

UniquenessGate check_uniqueness_gate(const StateSolution& state) {
  UniquenessGate g;
  g.margin = state.margin;
  if (state.margin < 0.5)
    g.classification = "m<1/2";
  else if (state.margin < 1.0)
    g.classification = "m<1";
  else
    g.classification = "uncertified";
  return g;
}

}  // namespace flowtopo
