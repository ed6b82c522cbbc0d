#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flowtopo/optimizer.hpp"
#include "test_support.hpp"

using namespace flowtopo;
using ftest::Fixture;

TEST_CASE("admissible projection") {
  Fixture fx(12, 12);

  SUBCASE("feasible designs pass through unchanged") {
    Field phi = interpolate_scalar(fx.design, [](const Vec2& p) {
      return 0.5 * std::sin(3 * p.x());
    });
    const ProjectionResult proj = project_admissible(phi, 0.9);
    CHECK(proj.sigma == 0.0);
    CHECK((proj.phi.coeff - phi.coeff).norm() == 0.0);
  }
  SUBCASE("clip then shift to the volume bound") {
    Field phi = fx.uniform_phi(0.0);
    phi.coeff.setConstant(1.5);
    const ProjectionResult proj = project_admissible(phi, 0.5);
    CHECK(proj.phi.coeff.maxCoeff() <= 1.0);
    CHECK(proj.sigma > 0.0);
    CHECK(design_volume(proj.phi) == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("scalar root-find lands on the exact shift") {
    Field phi = fx.uniform_phi(1.0);
    const ProjectionResult proj = project_admissible(phi, 0.0);
    CHECK(proj.sigma == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(design_volume(proj.phi) <= 0.0 + 1e-10);
    CHECK(proj.phi.coeff.cwiseAbs().maxCoeff() <= 1e-11);
  }
  SUBCASE("feasibility is exact after projection") {
    Field phi(fx.design);
    for (int i = 0; i < phi.coeff.size(); ++i) phi.coeff[i] = std::sin(7.0 * i) * 3.0;
    const ProjectionResult proj = project_admissible(phi, -0.2);
    CHECK(proj.phi.coeff.maxCoeff() <= 1.0);
    CHECK(proj.phi.coeff.minCoeff() >= -1.0);
    CHECK(design_volume(proj.phi) <= -0.2 * fx.mesh.measure() + 1e-10);
  }
}

TEST_CASE("alpha schedule honors the interpolation assumptions") {
  AlphaSchedule sched;
  sched.a0 = 1.0;
  sched.s = 0.5;
  sched.validate();

  SUBCASE("growth exponent outside (0, 2/3) is rejected") {
    AlphaSchedule bad = sched;
    bad.s = 0.9;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("growth condition"),
                         std::invalid_argument);
    bad.s = 0.0;
    CHECK_THROWS(bad.validate());
  }
  SUBCASE("monotone in phi and in eps, bounded at zero") {
    const std::vector<double> eps_levels{0.4, 0.2, 0.1, 0.05, 0.025};
    for (std::size_t k = 0; k + 1 < eps_levels.size(); ++k) {
      const double e_coarse = eps_levels[k], e_fine = eps_levels[k + 1];
      double prev = std::numeric_limits<double>::infinity();
      for (double phi = -1.0; phi <= 1.0 + 1e-12; phi += 0.05) {
        const double a = sched.alpha(e_coarse, phi);
        CHECK(sched.alpha(e_fine, phi) >= a - 1e-13);  // alpha_delta >= alpha_eps
        CHECK(a <= prev + 1e-13);                      // nonincreasing in phi
        CHECK(a >= 0.0);
        CHECK(a <= sched.abar(e_coarse) + 1e-13);
        prev = a;
      }
      CHECK(sched.alpha(e_coarse, 1.0) == 0.0);
      CHECK(sched.alpha(e_coarse, -1.0) == doctest::Approx(sched.abar(e_coarse)).epsilon(1e-14));
      CHECK(sched.alpha(e_coarse, 0.0) <= sched.a0 * (1.0 + 1.0 / sched.dsmooth));
    }
  }
}

namespace {

struct OptSetup {
  Fixture fx;
  StateProblem prob;
  ObjectiveSpec spec;

  OptSetup(int n, double mu)
      : fx(n, n), prob(fx.problem(mu)), spec() {
    prob.boundary = ftest::poiseuille_boundary(1.0, 1.0);
    prob.alpha.a0 = 25.0;
    prob.eps = 0.15;
    spec = ftest::potential_power_spec(prob, 0.02);
  }
};

}  // namespace

TEST_CASE("projected gradient step") {
  OptSetup s(12, 4.0);
  PhaseField phase{s.fx.uniform_phi(0.0), s.prob.eps, 0.5};
  s.prob.phi = phase.phi;
  const StateSolution state = solve_state(s.prob);
  const JBreakdown J = eval_J_eps(phase, state, s.prob, s.spec);
  OptimizerOptions opt;

  SUBCASE("zero gradient leaves the iterate and accepts") {
    ReducedGradient grad;
    grad.g = Field(s.fx.design);
    grad.ell = Eigen::VectorXd::Zero(s.fx.design.ndof());
    const StepResult res = step(s.prob, s.spec, phase, state, J, grad, 1.0, opt);
    CHECK(res.accepted);
    CHECK((res.phase.phi.coeff - phase.phi.coeff).norm() == 0.0);
    CHECK(res.J.total == J.total);
  }
  SUBCASE("tiny steps realize the first-order decrease") {
    const AdjointSolution adj = solve_adjoint(s.prob, state, s.spec);
    const ReducedGradient grad =
        reduced_gradient(s.prob, state, adj, phase, s.spec, InnerProduct::H1Weighted);
    const double tau = 1e-3;
    const StepResult res = step(s.prob, s.spec, phase, state, J, grad, tau, opt);
    REQUIRE(res.accepted);
    CHECK(res.tau == tau);  // accepted without halving
    const double predicted =
        tau * kernels::dot(grad.ell.data(), grad.g.coeff.data(), grad.g.coeff.size());
    const double actual = J.total - res.J.total;
    CHECK(actual / predicted >= 0.5);
    CHECK(actual / predicted <= 1.5);
  }
  SUBCASE("infeasible proposals are projected before evaluation") {
    ReducedGradient grad;
    grad.g = Field(s.fx.design);
    grad.g.coeff.setConstant(-5.0);  // pushes phi far above +1
    grad.ell = Eigen::VectorXd::Zero(s.fx.design.ndof());
    const StepResult res = step(s.prob, s.spec, phase, state, J, grad, 1.0, opt);
    CHECK(res.phase.phi.coeff.maxCoeff() <= 1.0);
    CHECK(res.phase.phi.coeff.minCoeff() >= -1.0);
  }
}

TEST_CASE("run_optimization") {
  SUBCASE("a stationary initial design returns immediately") {
    Fixture fx(10, 10);
    StateProblem prob = fx.problem();
    prob.alpha.a0 = 10.0;
    prob.eps = 0.2;
    ObjectiveSpec spec = ftest::potential_power_spec(prob, 0.1);
    PhaseField init{fx.uniform_phi(1.0), 0.2, 0.999};
    OptimizerOptions opt;
    const OptimizeResult res = run_optimization(prob, spec, init, opt);
    CHECK(res.termination == "stationarity");
    CHECK(res.history.size() == 1);
    CHECK(res.state.u.coeff.norm() == 0.0);
  }

  SUBCASE("diffuser descent: monotone J, exact feasibility, complementarity") {
    Fixture fx(24, 24);
    StateProblem prob = fx.problem(5.0);
    prob.boundary = ftest::poiseuille_boundary(1.0, 1.0);
    prob.alpha.a0 = 25.0;
    prob.eps = 0.15;
    ObjectiveSpec spec = ftest::potential_power_spec(prob, 0.02);
    PhaseField init{fx.uniform_phi(-0.2), 0.15, -0.2};
    OptimizerOptions opt;
    opt.max_outer = 25;
    opt.tol = 1e-10;
    const OptimizeResult res = run_optimization(prob, spec, init, opt);

    REQUIRE(res.history.size() >= 2);
    for (std::size_t k = 1; k < res.history.size(); ++k)
      CHECK(res.history[k].J.total <= res.history[k - 1].J.total + 1e-14);
    CHECK(res.phase.phi.coeff.maxCoeff() <= 1.0);
    CHECK(res.phase.phi.coeff.minCoeff() >= -1.0);
    const double volume = design_volume(res.phase.phi);
    CHECK(volume <= -0.2 * fx.mesh.measure() + 1e-10);
    CHECK(res.lambda >= 0.0);
    CHECK(res.lambda * (volume - -0.2 * fx.mesh.measure()) <= 1e-8 * (1.0 + res.lambda));
    CHECK(res.J.total < res.history.front().J.total);  // actually made progress
  }

  SUBCASE("identical runs are bitwise identical") {
    Fixture fx(12, 12);
    auto run_once = [&]() {
      StateProblem prob = fx.problem(5.0);
      prob.boundary = ftest::poiseuille_boundary(1.0, 1.0);
      prob.alpha.a0 = 25.0;
      prob.eps = 0.2;
      ObjectiveSpec spec = ftest::potential_power_spec(prob, 0.05);
      PhaseField init{fx.uniform_phi(0.0), 0.2, 0.0};
      OptimizerOptions opt;
      opt.max_outer = 6;
      return run_optimization(prob, spec, init, opt);
    };
    const OptimizeResult a = run_once();
    const OptimizeResult b = run_once();
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) {
      CHECK(a.history[k].J.total == b.history[k].J.total);
      CHECK(a.history[k].stationarity == b.history[k].stationarity);
      CHECK(a.history[k].lambda == b.history[k].lambda);
      CHECK(a.history[k].volume == b.history[k].volume);
    }
    CHECK((a.phase.phi.coeff - b.phase.phi.coeff).norm() == 0.0);
  }
}

TEST_CASE("sharp interface extraction") {
  Fixture fx(32, 32);
  SUBCASE("uniform signs") {
    Field a = fx.uniform_phi(0.3);
    CHECK(extract_sharp_interface(a).coeff.minCoeff() == 1.0);
    Field b = fx.uniform_phi(-0.3);
    CHECK(extract_sharp_interface(b).coeff.maxCoeff() == -1.0);
    Field z = fx.uniform_phi(0.0);  // ties resolve to fluid
    CHECK(extract_sharp_interface(z).coeff.minCoeff() == 1.0);
  }
  SUBCASE("sine profile masks flip within one cell of the zero level") {
    const double x0 = 0.47, eps = 0.12;
    Field phi = interpolate_scalar(fx.design, [&](const Vec2& p) {
      const double s = (p.x() - x0) / eps;
      return std::abs(s) >= 0.5 * M_PI ? (s > 0 ? 1.0 : -1.0) : std::sin(s);
    });
    const Field mask = extract_sharp_interface(phi);
    const double h = fx.mesh.hx();
    for (int n = 0; n < fx.design.num_scalar_nodes(); ++n) {
      const double x = fx.design.node_coord(n).x();
      if (x < x0 - h) CHECK(mask.coeff[n] == -1.0);
      if (x > x0 + h) CHECK(mask.coeff[n] == 1.0);
    }
  }
}

TEST_CASE("uniqueness gate classification") {
  StateSolution s;
  s.margin = 0.0;
  CHECK(check_uniqueness_gate(s).classification == "m<1/2");
  s.margin = 0.4;
  CHECK(check_uniqueness_gate(s).classification == "m<1/2");
  s.margin = 0.8;
  CHECK(check_uniqueness_gate(s).classification == "m<1");
  s.margin = 1.5;
  CHECK(check_uniqueness_gate(s).classification == "uncertified");
}

TEST_CASE("continuation") {
  SUBCASE("trivial all-fluid problem keeps the design at every level") {
    Fixture fx(16, 16);
    StateProblem prob = fx.problem();
    prob.alpha.a0 = 10.0;
    ObjectiveSpec spec = ftest::potential_power_spec(prob, 0.1);
    PhaseField init{fx.uniform_phi(1.0), 0.4, 0.999};
    ContinuationOptions copt;
    copt.eps_initial = 0.4;
    copt.levels = 3;
    const ContinuationResult res = run_continuation(prob, spec, init, copt);
    REQUIRE(res.levels.size() == 3);
    for (const auto& lvl : res.levels) {
      CHECK((lvl.result.phase.phi.coeff - res.levels[0].result.phase.phi.coeff).norm() == 0.0);
      CHECK(lvl.mismatch_l1 == 0.0);
    }
    CHECK(res.sharp_mask.coeff.minCoeff() == 1.0);
  }
  SUBCASE("unresolved interface width is refused") {
    Fixture fx(8, 8);
    StateProblem prob = fx.problem();
    ObjectiveSpec spec = ftest::potential_power_spec(prob, 0.1);
    PhaseField init{fx.uniform_phi(0.0), 0.01, 0.0};
    ContinuationOptions copt;
    copt.eps_initial = 0.01;  // pi*eps = 0.031 < 4h = 0.5
    copt.levels = 1;
    CHECK_THROWS_WITH_AS(run_continuation(prob, spec, init, copt),
                         doctest::Contains("unresolved"), std::invalid_argument);
  }
}
