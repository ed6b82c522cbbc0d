#include "flowtopo/adjoint.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace flowtopo {

namespace {

// Newton operator at the converged state plus divergence blocks, eliminated
// with homogeneous Dirichlet data.
struct LinearizedSystem {
  SpMat raw;
  SaddleLayout layout;
};

LinearizedSystem build_linearized(const StateProblem& prob, const StateSolution& state) {
  detail::StateOperator op = detail::build_state_operator(prob);
  const int deg = prob.options.quad_degree;
  SpMat J = op.K_linear + assemble_convection(state.u, deg) +
            assemble_convection_transposed(state.u, deg);
  LinearizedSystem sys;
  sys.raw = compose_saddle(J, op.B);
  sys.layout = op.layout;  // homogeneous values
  return sys;
}

Eigen::VectorXd solve_eliminated(const SpMat& raw, const SaddleLayout& layout,
                                 const Eigen::VectorXd& rhs) {
  Eigen::VectorXd r = rhs;
  for (int i = 0; i < layout.size(); ++i)
    if (layout.constrained[i]) r[i] = 0.0;
  SparseSolver solver;
  solver.factorize(eliminate(raw, layout.constrained));
  return solver.solve(r);
}

}  // namespace

AdjointSolution solve_adjoint(const StateProblem& prob, const StateSolution& state,
                              const ObjectiveSpec& spec) {
  const FunctionSpace& vel = *prob.velocity;
  const int deg = prob.options.quad_degree;
  const kernels::AlphaParams ap = prob.alpha_params();
  const Field& phi = prob.phi;
  const ObjectiveIntegrand& f = *spec.integrand;

  // rhs(v) = DF(u)(v) + int alpha(phi) u . v
  Eigen::VectorXd rhs_v = assemble_velocity_functional(
      vel, deg, [&](int t, double xi, double eta, const Vec2& x, Vec2& fvec, Mat2& fmat) {
        const Vec2 u = eval_vector(state.u, t, xi, eta);
        const Mat2 Du = eval_vector_jacobian(state.u, t, xi, eta);
        Vec2 dv;
        Mat2 dA;
        f.deriv(x, u, Du, dv, dA);
        double al = 0.0;
        double ph = std::min(1.0, std::max(-1.0, eval_scalar(phi, t, xi, eta)));
        kernels::alpha_eval(ap, &ph, &al, 1);
        fvec = dv + al * u;
        fmat = dA;
      });

  LinearizedSystem sys = build_linearized(prob, state);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.layout.size());
  rhs.head(vel.ndof()) = rhs_v;

  AdjointSolution adj;
  adj.margin_warning = state.margin >= 1.0;
  Eigen::VectorXd x;
  try {
    x = solve_eliminated(SpMat(sys.raw.transpose()), sys.layout, rhs);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("adjoint: ") + e.what() +
                             " (state margin = " + std::to_string(state.margin) + ")");
  }

  adj.q = Field(vel);
  adj.q.coeff = x.head(vel.ndof());
  adj.pi = Field(*prob.pressure);
  adj.pi.coeff = x.tail(prob.pressure->ndof());
  Eigen::VectorXd res = rhs - SpMat(sys.raw.transpose()) * x;
  for (int i = 0; i < sys.layout.size(); ++i)
    if (sys.layout.constrained[i]) res[i] = 0.0;
  const double scale = std::sqrt(kernels::nrm2sq(rhs.data(), rhs.size()));
  adj.residual = std::sqrt(kernels::nrm2sq(res.data(), res.size())) / (scale > 0 ? scale : 1.0);
  return adj;
}

ReducedGradient reduced_gradient(const StateProblem& prob, const StateSolution& state,
                                 const AdjointSolution& adjoint, const PhaseField& phase,
                                 const ObjectiveSpec& spec, InnerProduct ip) {
  const FunctionSpace& design = *prob.design;
  const int deg = prob.options.quad_degree;
  const kernels::AlphaParams ap = prob.alpha.params(phase.eps);
  const double eps = phase.eps;
  const double gamma = spec.gamma;

  ReducedGradient out;
  out.ip = ip;
  out.ell = assemble_scalar_functional(
      design, deg, [&](int t, double xi, double eta, const Vec2&, double& a, Vec2& b) {
        const Vec2 u = eval_vector(state.u, t, xi, eta);
        const Vec2 q = eval_vector(adjoint.q, t, xi, eta);
        double ph = std::min(1.0, std::max(-1.0, eval_scalar(phase.phi, t, xi, eta)));
        double da = 0.0;
        kernels::alpha_deriv(ap, &ph, &da, 1);
        a = da * (0.5 * u.squaredNorm() - u.dot(q)) - gamma / eps * ph;
        b = gamma * eps * eval_scalar_gradient(phase.phi, t, xi, eta);
      });

  SpMat R;
  if (ip == InnerProduct::H1Weighted) {
    R = SpMat(eps * assemble_stiffness(design, 1.0, deg)) +
        SpMat((1.0 / eps) * assemble_mass(design, deg));
  } else {
    R = assemble_mass(design, deg);
  }
  Eigen::SimplicialLDLT<SpMat> ldlt(R);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("reduced_gradient: Riesz solve failed");
  out.g = Field(design);
  out.g.coeff = ldlt.solve(out.ell);
  return out;
}

double gradient_pairing(const ReducedGradient& grad, const Field& dphi) {
  return kernels::dot(grad.ell.data(), dphi.coeff.data(), dphi.coeff.size());
}

Field solve_linearized_state(const StateProblem& prob, const StateSolution& state,
                             const Field& dphi) {
  if (state.margin >= 1.0)
    throw std::runtime_error("linearized state: margin >= 1, operator not certified");
  const FunctionSpace& vel = *prob.velocity;
  const int deg = prob.options.quad_degree;
  const kernels::AlphaParams ap = prob.alpha_params();

  Eigen::VectorXd rhs_v = assemble_velocity_functional(
      vel, deg, [&](int t, double xi, double eta, const Vec2&, Vec2& fvec, Mat2&) {
        const Vec2 u = eval_vector(state.u, t, xi, eta);
        double ph = std::min(1.0, std::max(-1.0, eval_scalar(prob.phi, t, xi, eta)));
        double da = 0.0;
        kernels::alpha_deriv(ap, &ph, &da, 1);
        fvec = -da * eval_scalar(dphi, t, xi, eta) * u;
      });

  LinearizedSystem sys = build_linearized(prob, state);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.layout.size());
  rhs.head(vel.ndof()) = rhs_v;
  const Eigen::VectorXd x = solve_eliminated(sys.raw, sys.layout, rhs);
  Field du(vel);
  du.coeff = x.head(vel.ndof());
  return du;
}

}  // namespace flowtopo
