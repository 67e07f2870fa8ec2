#pragma once

// Fixed-beamformer IRS block: lift the phase vector to Theta, move the
// rank-one constraint into the objective as chi * (||Theta||_* - ||Theta||_2),
// and run SCA on the resulting difference-of-convex program. Phases are
// recovered from the principal eigenpair once the rank residual is driven
// down; Gaussian randomization is deliberately absent because it would break
// the outer loop's monotonicity.

#include <vector>

#include "irscr/conic.hpp"
#include "irscr/types.hpp"

namespace irscr {

// Data with the beamformers frozen: lifted channels and W_k = w_k w_k^H.
struct FixedBeamProblem {
  std::vector<CMat> g_lift;  // G_k, (m+1) x n_t
  std::vector<CMat> l_lift;  // L_i, (m+1) x n_t
  std::vector<CMat> w_outer; // W_k
  RVec noise;
  BudgetConfig budgets;

  int m_plus_1() const { return g_lift.empty() ? 0 : static_cast<int>(g_lift[0].rows()); }
  int k_users() const { return static_cast<int>(g_lift.size()); }
  int i_users() const { return static_cast<int>(l_lift.size()); }
};

FixedBeamProblem make_fixed_beam_problem(const ChannelSet& ch,
                                         const BeamformerSet& beams,
                                         const BudgetConfig& budgets);

struct IrsSubproblemState {
  CMat theta;
  double chi = 1e3;
  int iter = 0;
  std::vector<double> penalized_history;  // f~ - g~ + chi*(||.||_* - ||.||_2)
  std::vector<double> residual_history;   // ||.||_* - ||.||_2
};

struct IrsSolveOptions {
  double chi = 1e3;
  double chi_growth = 10.0;
  int max_escalations = 3;
  double tol_inner = 1e-4;
  int max_iter = 30;                 // per chi value
  double residual_rel_tol = 1e-6;    // accept when resid <= tol * ||Theta||_2
  double recovery_rel_tol = 1e-4;    // phase-recovery rate error bound
  conic::SolverOptions conic;
};

struct IrsResult {
  PhaseConfig phases;
  CMat theta;
  double rank_residual = 0.0;
  double recovery_error = 0.0;  // relative rate change across recovery
  double chi_final = 0.0;
  int iterations = 0;
  bool improved = true;   // false: fell back to the initial phases
  bool converged = true;
};

double f_tilde(const CMat& theta, const FixedBeamProblem& prob);
double g_tilde(const CMat& theta, const FixedBeamProblem& prob);

// -(1/ln 2) sum_k [sum_{r != k} G_k W_r G_k^H] / [sum_{r != k} Tr(Theta G_k W_r G_k^H) + sigma_k^2]
CMat grad_g_tilde(const CMat& theta, const FixedBeamProblem& prob);

// ||Theta^(j)||_2 + Tr(q q^H (Theta - Theta^(j))), q the top eigenvector of
// Theta^(j); a global underestimator of the spectral norm.
double spectral_underestimator(const CMat& theta_at, const CMat& theta_query);

// ||Theta||_* - ||Theta||_2 = sum of all-but-largest eigenvalues (PSD input);
// zero iff rank <= 1.
double rank_residual(const CMat& theta);

// One convex subproblem of the penalized SCA.
IrsSubproblemState solve_irs_iteration(const IrsSubproblemState& state,
                                       const FixedBeamProblem& prob,
                                       const conic::SolverOptions& opts = {});

// Principal-eigenpair decomposition, normalization to a unit last entry and
// per-entry unit-modulus projection. Throws RankResidualError when the input
// is not close enough to rank one for recovery to make sense.
struct PhaseRecovery {
  PhaseConfig phases;
  double recovery_error = 0.0;
};
PhaseRecovery recover_phases(const CMat& theta, const FixedBeamProblem& prob,
                             double residual_rel_tol = 1e-6);

// Full inner loop from an initial phase configuration. Guarantees the
// recovered sum rate is never worse than the initial one (falls back to the
// input phases otherwise).
IrsResult run_irs_sca(const PhaseConfig& initial, const FixedBeamProblem& prob,
                      const IrsSolveOptions& opts = {});

}  // namespace irscr
