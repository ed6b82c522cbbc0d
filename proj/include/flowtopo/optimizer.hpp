#pragma once

#include "flowtopo/adjoint.hpp"

namespace flowtopo {

struct ProjectionResult {
  Field phi;
  double sigma = 0.0;  // volume shift, > 0 iff the constraint was activated
};

// Nodewise clip to [-1,1]; if int phi > beta |Omega| afterwards, shift by the
// scalar sigma >= 0 with int clip(phi_raw - sigma) = beta |Omega| (bisection
// to 1e-12).
ProjectionResult project_admissible(const Field& phi_raw, double beta);

// Lumped design-space volume int phi dx.
double design_volume(const Field& phi);

// Exact lumping int N_i dx of the P1 design space. In this diagonal metric
// the nodewise clip plus scalar volume shift is the exact projection onto
// the admissible set, which makes projected-gradient theory applicable.
Eigen::VectorXd design_lumped_mass(const FunctionSpace& s);

struct OptimizerOptions {
  double tol = 1e-6;          // stationarity, scaled by the initial residual
  double tol_abs = 1e-11;     // absolute floor (projection carries 1e-12 noise)
  int max_outer = 500;
  double tau0 = 1.0;
  double tau_max = 64.0;
  double c1 = 1e-4;           // projected-gradient Armijo constant
  int max_halvings = 30;
  InnerProduct ip = InnerProduct::H1Weighted;
  bool verbose = false;
};

struct StepResult {
  PhaseField phase;
  StateSolution state;
  JBreakdown J;
  bool accepted = false;
  double tau = 0.0;
  double sigma = 0.0;
};

// One projected-gradient step with Armijo acceptance
// J(phi+) <= J(phi) - c1/tau ||phi+ - phi||^2 (lumped L2 norm).
StepResult step(const StateProblem& prob, const ObjectiveSpec& spec, const PhaseField& phase,
                const StateSolution& state, const JBreakdown& J, const ReducedGradient& grad,
                double tau, const OptimizerOptions& opt);

struct OptimizeRecord {
  int iter = 0;
  JBreakdown J;
  double stationarity = 0.0;
  double lambda = 0.0;
  double tau = 0.0;
  double volume = 0.0;
  double margin = 0.0;
};

struct OptimizeResult {
  PhaseField phase;
  StateSolution state;
  JBreakdown J;
  std::vector<OptimizeRecord> history;
  double lambda = 0.0;
  double stationarity = 0.0;
  std::string termination;  // "stationarity" | "max_outer" | "stalled"
};

OptimizeResult run_optimization(StateProblem& prob, const ObjectiveSpec& spec,
                                const PhaseField& phi_init, const OptimizerOptions& opt);

// Threshold at 0; ties resolve to fluid (+1).
Field extract_sharp_interface(const Field& phi);

struct ContinuationLevel {
  double eps = 0.0;
  double abar = 0.0;
  OptimizeResult result;
  double mismatch_l1 = 0.0;     // || phi - sharp ||_L1 on {sharp=+1, phi<0}
  double mismatch_ratio = 0.0;  // mismatch / eps
};

struct ContinuationOptions {
  double eps_initial = 0.32;
  int levels = 5;  // halving schedule
  OptimizerOptions opt;
  int min_cells_per_interface = 4;  // require pi*eps >= this many cells
};

struct ContinuationResult {
  std::vector<ContinuationLevel> levels;
  Field sharp_mask;
  J0Result j0;
  double j_eps_final = 0.0;
};

ContinuationResult run_continuation(StateProblem& prob, const ObjectiveSpec& spec,
                                    const PhaseField& phi_init, const ContinuationOptions& copt);

struct UniquenessGate {
  double margin = 0.0;
  // "m<1/2": sharp-minimizer regime; "m<1": unique; "uncertified" otherwise
  std::string classification;
};

UniquenessGate check_uniqueness_gate(const StateSolution& state);

}  // namespace flowtopo
