#include "flowtopo/objective.hpp"

#include <cmath>

namespace flowtopo {

double TotalPotentialPower::value(const Vec2& x, const Vec2& u, const Mat2& Du) const {
  double v = 0.5 * mu_ * Du.squaredNorm();
  if (!force_.is_zero) v -= force_.value(x).dot(u);
  return v;
}

void TotalPotentialPower::deriv(const Vec2& x, const Vec2&, const Mat2& Du, Vec2& dv,
                                Mat2& dA) const {
  dv = force_.is_zero ? Vec2::Zero() : Vec2(-force_.value(x));
  dA = mu_ * Du;
}

double TotalPotentialPower::deriv_x(const Vec2& x, const Vec2& u, const Mat2&,
                                    const Vec2& V) const {
  if (force_.is_zero) return 0.0;
  // x-dependence only through the body force: D_1 f . V = -((V.grad)f).u
  return -(force_.jacobian(x) * V).dot(u);
}

void ObjectiveSpec::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("objective: gamma must be positive");
  if (!integrand) throw std::invalid_argument("objective: missing integrand");
}

double eval_F(const Field& u, const ObjectiveSpec& spec) {
  const ObjectiveIntegrand& f = *spec.integrand;
  return integrate(u.space->mesh(), spec.quad_degree,
                   [&](int t, double xi, double eta, const Vec2& x) {
                     return f.value(x, eval_vector(u, t, xi, eta),
                                    eval_vector_jacobian(u, t, xi, eta));
                   });
}

double eval_ginzburg_landau(const PhaseField& phase, const ObjectiveSpec& spec) {
  const Field& phi = phase.phi;
  const double lo = phi.coeff.minCoeff(), hi = phi.coeff.maxCoeff();
  if (lo < -1.0 - 1e-12 || hi > 1.0 + 1e-12)
    throw std::invalid_argument("ginzburg-landau: |phi| > 1 hits the infinite potential branch");
  const double eps = phase.eps;
  const double value =
      integrate(phi.space->mesh(), spec.quad_degree, [&](int t, double xi, double eta, const Vec2&) {
        const double p = std::min(1.0, std::max(-1.0, eval_scalar(phi, t, xi, eta)));
        const Vec2 g = eval_scalar_gradient(phi, t, xi, eta);
        return 0.5 * eps * g.squaredNorm() + 0.5 * (1.0 - p * p) / eps;
      });
  return spec.gamma * value;
}

JBreakdown eval_J_eps(const PhaseField& phase, const StateSolution& state,
                      const StateProblem& prob, const ObjectiveSpec& spec) {
  JBreakdown out;
  out.alpha_term =
      0.5 * alpha_weighted_inner(phase.phi, prob.alpha.params(phase.eps), state.u, state.u,
                                 spec.quad_degree);
  out.F_term = eval_F(state.u, spec);
  out.GL_term = eval_ginzburg_landau(phase, spec);
  out.total = out.alpha_term + out.F_term + out.GL_term;
  return out;
}

namespace {

// Interface segments between fluid and solid cells (cell solid iff all three
// vertex mask values are negative).
std::vector<std::array<Vec2, 2>> interface_segments(const Field& mask) {
  const Mesh& mesh = mask.space->mesh();
  std::vector<signed char> fluid(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.tri(t);
    fluid[t] = (mask.coeff[tri[0]] > 0 || mask.coeff[tri[1]] > 0 || mask.coeff[tri[2]] > 0) ? 1 : 0;
  }
  // edge -> adjacent triangles
  std::vector<std::array<int, 2>> adj(mesh.num_edges(), {-1, -1});
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int e : mesh.tri_edges(t)) {
      if (adj[e][0] < 0)
        adj[e][0] = t;
      else
        adj[e][1] = t;
    }
  std::vector<std::array<Vec2, 2>> segs;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (adj[e][1] < 0) continue;
    if (fluid[adj[e][0]] == fluid[adj[e][1]]) continue;
    segs.push_back({mesh.vertex(mesh.edge(e)[0]), mesh.vertex(mesh.edge(e)[1])});
  }
  return segs;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  return (p - (a + t * ab)).norm();
}

}  // namespace

double perimeter_edge_count(const Field& mask) {
  double len = 0.0;
  for (const auto& s : interface_segments(mask)) len += (s[1] - s[0]).norm();
  return len;
}

double perimeter_gl(const Field& mask, double eps_rec) {
  const Mesh& mesh = mask.space->mesh();
  const auto segs = interface_segments(mask);
  if (segs.empty()) return 0.0;
  // wide enough that the profile sees the rounded distance level sets rather
  // than the jagged near field of the staircase segments
  if (eps_rec <= 0.0) eps_rec = 6.0 * std::min(mesh.hx(), mesh.hy());

  // signed distance to the interface, reconstructed optimal profile
  Field rec(*mask.space);
  const double half_width = 0.5 * M_PI * eps_rec;
  for (int n = 0; n < mask.space->num_scalar_nodes(); ++n) {
    const Vec2 p = mask.space->node_coord(n);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : segs) d = std::min(d, point_segment_distance(p, s[0], s[1]));
    const double sd = (mask.coeff[n] > 0 ? 1.0 : -1.0) * d;
    rec.coeff[n] = std::abs(sd) >= half_width ? (sd > 0 ? 1.0 : -1.0) : std::sin(sd / eps_rec);
  }
  PhaseField phase{rec, eps_rec, 0.0};
  ObjectiveSpec unit;
  unit.gamma = 1.0;
  unit.integrand = nullptr;  // not used by the GL term
  const double energy = eval_ginzburg_landau(phase, unit);
  return energy / ObjectiveSpec::c0;
}

J0Result eval_J0(const StateProblem& prob, const Field& sharp_mask, const ObjectiveSpec& spec,
                 PerimeterEstimator estimator) {
  J0Result out;
  out.state = solve_sharp_state(prob, sharp_mask);
  out.F_term = eval_F(out.state.u, spec);
  out.perimeter = estimator == PerimeterEstimator::gl_profile ? perimeter_gl(sharp_mask)
                                                              : perimeter_edge_count(sharp_mask);
  out.total = out.F_term + spec.gamma * ObjectiveSpec::c0 * out.perimeter;
  return out;
}

double sharp_mismatch_L1(const PhaseField& phase, const Field& mask, int quad_degree) {
  const Field& phi = phase.phi;
  return integrate(phi.space->mesh(), quad_degree,
                   [&](int t, double xi, double eta, const Vec2&) {
                     const double m = eval_scalar(mask, t, xi, eta);
                     const double p = eval_scalar(phi, t, xi, eta);
                     if (m > 0 && p < 0) return std::abs(p - 1.0);
                     return 0.0;
                   });
}

}  // namespace flowtopo
