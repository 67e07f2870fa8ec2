#pragma once

// Fixed-phase beamforming block: successive convex approximation over the
// lifted matrices W_k = w_k w_k^H with the rank constraint dropped, then
// principal-eigenpair extraction. The relaxation is tight for this problem
// family, so the extraction residual is monitored rather than repaired.

#include <vector>

#include "irscr/conic.hpp"
#include "irscr/types.hpp"

namespace irscr {

// Everything the subproblem needs once the IRS phases are frozen.
struct FixedPhaseProblem {
  std::vector<CVec> g_eff;  // effective SU channels g~_k
  std::vector<CVec> l_eff;  // effective PU channels l~_i
  RVec noise;               // per-SU noise power
  BudgetConfig budgets;

  int n_t() const { return g_eff.empty() ? 0 : static_cast<int>(g_eff[0].size()); }
  int k_users() const { return static_cast<int>(g_eff.size()); }
  int i_users() const { return static_cast<int>(l_eff.size()); }
};

FixedPhaseProblem make_fixed_phase_problem(const ChannelSet& ch,
                                           const PhaseConfig& phases,
                                           const BudgetConfig& budgets);

struct BeamSubproblemState {
  LiftedBeamSet w_mat;
  int iter = 0;
  std::vector<double> surrogate_history;  // f - g^ after each solve
  std::vector<double> rate_history;       // true sum rate (trace form)
  double conic_gap = 0.0;                 // duality gap of the last solve
};

struct BeamSolveOptions {
  double tol_inner = 1e-4;
  int max_iter = 30;
  double rank_tol = 1e-4;  // residual above this raises RankResidualError
  conic::SolverOptions conic;
};

struct BeamResult {
  BeamformerSet beams;
  LiftedBeamSet lifted;  // converged relaxed iterate, pre-extraction
  std::vector<double> rank_residuals;
  std::vector<double> rate_history;
  int iterations = 0;
  bool converged = true;  // false: max_iter hit first
};

// f = -sum_k log2( sum_r Tr(g~_k g~_k^H W_r) + sigma_k^2 )
double f_value(const LiftedBeamSet& lifted, const FixedPhaseProblem& prob);

// g = -sum_k log2( sum_{r != k} Tr(g~_k g~_k^H W_r) + sigma_k^2 );
// the subproblem objective is g - f (the sum rate, negated arguments).
double g_value(const LiftedBeamSet& lifted, const FixedPhaseProblem& prob);

// Gradient of g with respect to W_k:
//   -(1/ln 2) sum_{t != k} g~_t g~_t^H / (sum_{r != t} Tr(g~_t g~_t^H W_r) + sigma_t^2)
CMat grad_g(const LiftedBeamSet& lifted, const FixedPhaseProblem& prob, int k);

// First-order global underestimator of g around `at`, evaluated at `query`.
double underestimate_g(const LiftedBeamSet& at, const LiftedBeamSet& query,
                       const FixedPhaseProblem& prob);

// One convex subproblem: minimize f - g^(W, W^(j)) s.t. power, leakage, PSD.
BeamSubproblemState solve_beam_iteration(const BeamSubproblemState& state,
                                         const FixedPhaseProblem& prob,
                                         const conic::SolverOptions& opts = {});

// Principal-eigenpair extraction: w = sqrt(lambda_1) u_1, residual sigma2/sigma1
// (0 for the zero matrix).
struct RankOneExtraction {
  CVec w;
  double residual = 0.0;
};
RankOneExtraction extract_rank_one(const CMat& w_mat);

// Feasible starting point: MRT directions with the largest common power scale
// c <= 1 satisfying both the power budget and every leakage tolerance.
BeamformerSet mrt_initial_beams(const FixedPhaseProblem& prob);

// Full inner loop: SCA from `initial` until the relative change of the true
// objective drops below tol_inner, then rank-one extraction with residual
// certification against opts.rank_tol.
BeamResult run_beamforming_sca(const LiftedBeamSet& initial,
                               const FixedPhaseProblem& prob,
                               const BeamSolveOptions& opts = {});

}  // namespace irscr
