#pragma once

#include <memory>

#include "flowtopo/state.hpp"

namespace flowtopo {

// Pluggable Caratheodory integrand f(x, u, Du) with the derivative entry
// points the adjoint and the geometric variation need. Weak lower
// semicontinuity and the growth conditions are obligations on the supplier.
class ObjectiveIntegrand {
 public:
  virtual ~ObjectiveIntegrand() = default;
  virtual double value(const Vec2& x, const Vec2& u, const Mat2& Du) const = 0;
  // dv = D_2 f (vector), dA = D_3 f (matrix, paired with Dv)
  virtual void deriv(const Vec2& x, const Vec2& u, const Mat2& Du, Vec2& dv, Mat2& dA) const = 0;
  // D_1 f paired with a direction V at x
  virtual double deriv_x(const Vec2& x, const Vec2& u, const Mat2& Du, const Vec2& V) const {
    return 0.0;
  }
};

// Canonical choice, total potential power: f = (mu/2)|Du|^2 - fbody . u.
class TotalPotentialPower final : public ObjectiveIntegrand {
 public:
  TotalPotentialPower(double mu, BodyForce force) : mu_(mu), force_(std::move(force)) {}
  double value(const Vec2& x, const Vec2& u, const Mat2& Du) const override;
  void deriv(const Vec2& x, const Vec2& u, const Mat2& Du, Vec2& dv, Mat2& dA) const override;
  double deriv_x(const Vec2& x, const Vec2& u, const Mat2& Du, const Vec2& V) const override;

 private:
  double mu_;
  BodyForce force_;
};

struct ObjectiveSpec {
  double gamma = 1.0;
  static constexpr double c0 = 1.5707963267948966;  // int_{-1}^{1} sqrt(2 psi) = pi/2
  std::shared_ptr<const ObjectiveIntegrand> integrand;
  int quad_degree = 6;

  void validate() const;
};

// Design iterate: the phase field with its interfacial width and volume bound.
struct PhaseField {
  Field phi;
  double eps = 0.1;
  double beta = 0.0;
};

double eval_F(const Field& u, const ObjectiveSpec& spec);

// gamma * int (eps/2)|grad phi|^2 + psi(phi)/eps dx, psi = (1-phi^2)/2.
// Values outside [-1,1] (beyond 1e-12) hit the +infinity branch -> error.
double eval_ginzburg_landau(const PhaseField& phase, const ObjectiveSpec& spec);

struct JBreakdown {
  double alpha_term = 0.0;
  double F_term = 0.0;
  double GL_term = 0.0;
  double total = 0.0;  // always alpha_term + F_term + GL_term, summed in this order
};

JBreakdown eval_J_eps(const PhaseField& phase, const StateSolution& state,
                      const StateProblem& prob, const ObjectiveSpec& spec);

// Perimeter of the +1 region of a nodal mask: raw interface edge length, and
// the corrected estimate from the Ginzburg-Landau energy of the reconstructed
// optimal profile (staircase edge counting overestimates tilted interfaces).
double perimeter_edge_count(const Field& mask);
double perimeter_gl(const Field& mask, double eps_rec = 0.0);  // 0 -> 6*h default

enum class PerimeterEstimator { gl_profile, edge_count };

struct J0Result {
  double F_term = 0.0;
  double perimeter = 0.0;
  double total = 0.0;
  StateSolution state;
};

J0Result eval_J0(const StateProblem& prob, const Field& sharp_mask, const ObjectiveSpec& spec,
                 PerimeterEstimator estimator = PerimeterEstimator::gl_profile);

// L1 mismatch between phi and a +-1 mask on {mask interp > 0, phi < 0}.
double sharp_mismatch_L1(const PhaseField& phase, const Field& mask, int quad_degree = 6);

}  // namespace flowtopo
