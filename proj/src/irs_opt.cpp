#include "irscr/irs_opt.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "irscr/system_model.hpp"

namespace irscr {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// T_{k,r} = G_k W_r G_k^H, precomputed once per subproblem
struct TraceKernels {
  std::vector<std::vector<CMat>> su;  // [k][r]
  std::vector<CMat> leak;             // sum_k L_i W_k L_i^H per PU
};

TraceKernels make_kernels(const FixedBeamProblem& prob) {
  TraceKernels ker;
  const int kk = prob.k_users();
  ker.su.resize(kk);
  for (int k = 0; k < kk; ++k) {
    ker.su[k].reserve(kk);
    for (int r = 0; r < kk; ++r)
      ker.su[k].push_back(prob.g_lift[k] * prob.w_outer[r] *
                          prob.g_lift[k].adjoint());
  }
  ker.leak.reserve(prob.i_users());
  for (int i = 0; i < prob.i_users(); ++i) {
    CMat u = CMat::Zero(prob.m_plus_1(), prob.m_plus_1());
    for (int k = 0; k < kk; ++k)
      u += prob.l_lift[i] * prob.w_outer[k] * prob.l_lift[i].adjoint();
    ker.leak.push_back(std::move(u));
  }
  return ker;
}

double trace_re(const CMat& a, const CMat& b) {
  return std::real((a * b).trace());
}

double interference_tilde(const CMat& theta, const TraceKernels& ker,
                          const FixedBeamProblem& prob, int k) {
  double v = prob.noise[k];
  for (int r = 0; r < prob.k_users(); ++r) {
    if (r == k) continue;
    v += trace_re(theta, ker.su[k][r]);
  }
  return v;
}

}  // namespace

FixedBeamProblem make_fixed_beam_problem(const ChannelSet& ch,
                                         const BeamformerSet& beams,
                                         const BudgetConfig& budgets) {
  FixedBeamProblem prob;
  const ScenarioDims dims = ch.dims();
  for (int k = 0; k < dims.k_users; ++k)
    prob.g_lift.push_back(lift_su_channel(ch, k));
  for (int i = 0; i < dims.i_users; ++i)
    prob.l_lift.push_back(lift_pu_channel(ch, i));
  for (const auto& wk : beams.w) prob.w_outer.push_back(wk * wk.adjoint());
  prob.noise = ch.noise_power;
  prob.budgets = budgets;
  return prob;
}

double f_tilde(const CMat& theta, const FixedBeamProblem& prob) {
  const TraceKernels ker = make_kernels(prob);
  double f = 0.0;
  for (int k = 0; k < prob.k_users(); ++k) {
    double a = prob.noise[k];
    for (int r = 0; r < prob.k_users(); ++r) a += trace_re(theta, ker.su[k][r]);
    if (!(a > 0.0)) throw Error("f_tilde: nonpositive log argument");
    f -= std::log2(a);
  }
  return f;
}

double g_tilde(const CMat& theta, const FixedBeamProblem& prob) {
  const TraceKernels ker = make_kernels(prob);
  double g = 0.0;
  for (int k = 0; k < prob.k_users(); ++k) {
    const double a = interference_tilde(theta, ker, prob, k);
    if (!(a > 0.0)) throw Error("g_tilde: nonpositive log argument");
    g -= std::log2(a);
  }
  return g;
}

CMat grad_g_tilde(const CMat& theta, const FixedBeamProblem& prob) {
  const TraceKernels ker = make_kernels(prob);
  const int n = prob.m_plus_1();
  CMat grad = CMat::Zero(n, n);
  for (int k = 0; k < prob.k_users(); ++k) {
    CMat num = CMat::Zero(n, n);
    for (int r = 0; r < prob.k_users(); ++r) {
      if (r == k) continue;
      num += ker.su[k][r];
    }
    if (num.cwiseAbs().maxCoeff() == 0.0) continue;
    grad -= num / (kLn2 * interference_tilde(theta, ker, prob, k));
  }
  return grad;
}

double spectral_underestimator(const CMat& theta_at, const CMat& theta_query) {
  Eigen::SelfAdjointEigenSolver<CMat> es(theta_at);
  const int n = static_cast<int>(theta_at.rows());
  const double top = es.eigenvalues()[n - 1];
  const CVec q = es.eigenvectors().col(n - 1);
  return top + std::real(q.dot((theta_query - theta_at) * q));
}

double rank_residual(const CMat& theta) {
  Eigen::SelfAdjointEigenSolver<CMat> es(theta, Eigen::EigenvaluesOnly);
  const RVec ev = es.eigenvalues();
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) sum += std::max(0.0, ev[i]);
  return sum;
}

IrsSubproblemState solve_irs_iteration(const IrsSubproblemState& state,
                                       const FixedBeamProblem& prob,
                                       const conic::SolverOptions& opts) {
  const int n = prob.m_plus_1();
  const TraceKernels ker = make_kernels(prob);

  conic::ConicProblem cp;
  const conic::VarRef th = cp.add_psd_var(n);

  // f~: one log term per user over Theta
  for (int k = 0; k < prob.k_users(); ++k) {
    CMat total = CMat::Zero(n, n);
    for (int r = 0; r < prob.k_users(); ++r) total += ker.su[k][r];
    cp.add_log_cost(1.0 / kLn2, prob.noise[k], {{th, total}});
  }

  // -g-bar: linearization of g~ at the current iterate
  const CMat dg = grad_g_tilde(state.theta, prob);
  cp.add_linear_cost(th, -dg);
  cp.add_constant_cost(-(g_tilde(state.theta, prob) -
                         std::real((dg.adjoint() * state.theta).trace())));

  // chi * (||Theta||_* - spectral underestimator); the nuclear norm is a
  // trace on the PSD cone and the underestimator is affine
  Eigen::SelfAdjointEigenSolver<CMat> es(state.theta);
  const CVec q = es.eigenvectors().col(n - 1);
  const double top = es.eigenvalues()[n - 1];
  cp.add_nuclear_norm_cost(th, state.chi);
  cp.add_linear_cost(th, -state.chi * (q * q.adjoint()));
  cp.add_constant_cost(-state.chi *
                       (top - std::real(q.dot(state.theta * q))));

  cp.pin_diagonal(th, 1.0);
  for (int i = 0; i < prob.i_users(); ++i) {
    if (ker.leak[i].cwiseAbs().maxCoeff() == 0.0 && prob.budgets.p_tol[i] >= 0.0)
      continue;  // zero beams leak nothing
    cp.add_trace_constraint({{th, ker.leak[i]}},
                            conic::ConicProblem::Sense::less_equal,
                            prob.budgets.p_tol[i]);
  }
  cp.set_initial_point(th, state.theta);

  const conic::ConicSolution sol = cp.solve(opts);
  if (sol.status == conic::SolveStatus::infeasible)
    throw SolverFailure("IRS subproblem reported infeasible");
  if (sol.status == conic::SolveStatus::numerical_failure)
    throw SolverFailure("IRS subproblem numerical failure");

  IrsSubproblemState next;
  next.theta = sol.vars[0];
  next.chi = state.chi;
  next.iter = state.iter + 1;
  next.penalized_history = state.penalized_history;
  next.residual_history = state.residual_history;
  const double resid = rank_residual(next.theta);
  next.penalized_history.push_back(f_tilde(next.theta, prob) -
                                   g_tilde(next.theta, prob) +
                                   state.chi * resid);
  next.residual_history.push_back(resid);
  return next;
}

PhaseRecovery recover_phases(const CMat& theta, const FixedBeamProblem& prob,
                             double residual_rel_tol) {
  const int n = static_cast<int>(theta.rows());
  const int m = n - 1;
  Eigen::SelfAdjointEigenSolver<CMat> es(theta);
  const double top = es.eigenvalues()[n - 1];
  const double resid = rank_residual(theta);
  if (resid > residual_rel_tol * std::max(top, 1e-300))
    throw RankResidualError("theta rank residual " + std::to_string(resid) +
                            " too large for phase recovery");

  CVec t = std::sqrt(std::max(0.0, top)) * es.eigenvectors().col(n - 1);
  if (std::abs(t[m]) < 1e-6)
    throw Error("phase recovery: vanishing dummy entry");
  t *= std::conj(t[m]) / std::abs(t[m]);  // rotate so the last entry is real > 0

  PhaseRecovery out;
  out.phases.psi.resize(m);
  for (int j = 0; j < m; ++j) {
    // theta_j = e^{-j psi_j}; near-rank-one entries are only approximately
    // unit modulus, project and keep the angle
    const Cplx v = t[j];
    out.phases.psi[j] = (std::abs(v) > 0.0) ? -std::arg(v) : 0.0;
  }

  // quantify what projection + truncation cost us, in rate terms
  const double rate_theta =
      g_tilde(theta, prob) - f_tilde(theta, prob);
  const CMat theta_rec = lifted_phase_matrix(out.phases);
  const double rate_rec = g_tilde(theta_rec, prob) - f_tilde(theta_rec, prob);
  out.recovery_error =
      std::abs(rate_theta - rate_rec) / std::max(1e-12, std::abs(rate_theta));
  return out;
}

IrsResult run_irs_sca(const PhaseConfig& initial, const FixedBeamProblem& prob,
                      const IrsSolveOptions& opts) {
  IrsResult result;
  result.phases = initial;

  IrsSubproblemState state;
  state.theta = lifted_phase_matrix(initial);

  const double rate_initial =
      g_tilde(state.theta, prob) - f_tilde(state.theta, prob);

  // Penalty homotopy. The spectral-norm linearization charges any eigenvector
  // rotation about chi * alpha^2, so starting straight at the target chi
  // freezes the iterate near its initialization; ramping chi lets the rate
  // terms steer first and the penalty squeeze the rank afterwards. Past the
  // target value, escalations handle a stalling residual.
  std::vector<double> chi_levels;
  for (double s = 1e-3; s < 0.999; s *= 10.0) chi_levels.push_back(opts.chi * s);
  chi_levels.push_back(opts.chi);
  for (int esc = 0; esc < opts.max_escalations; ++esc)
    chi_levels.push_back(chi_levels.back() * opts.chi_growth);
  const std::size_t terminal_level = chi_levels.size() - 1 -
                                     static_cast<std::size_t>(opts.max_escalations);

  int total_iters = 0;
  bool converged = false;
  bool rank_ok = false;
  for (std::size_t level = 0; level < chi_levels.size(); ++level) {
    state.chi = chi_levels[level];
    double prev_rate = g_tilde(state.theta, prob) - f_tilde(state.theta, prob);
    converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
      state = solve_irs_iteration(state, prob, opts.conic);
      ++total_iters;
      const double rate = g_tilde(state.theta, prob) - f_tilde(state.theta, prob);
      if (std::abs(rate - prev_rate) <=
          opts.tol_inner * std::max(1.0, std::abs(prev_rate))) {
        converged = true;
        break;
      }
      prev_rate = rate;
    }
    if (level < terminal_level) continue;
    Eigen::SelfAdjointEigenSolver<CMat> es(state.theta, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (rank_residual(state.theta) <= opts.residual_rel_tol * top) {
      rank_ok = true;
      break;
    }
  }
  if (!rank_ok)
    throw RankResidualError(
        "IRS penalty loop could not reach a rank-one iterate (chi " +
        std::to_string(state.chi) + ")");

  result.iterations = total_iters;
  result.converged = converged;
  result.theta = state.theta;
  result.rank_residual = rank_residual(state.theta);
  result.chi_final = state.chi;

  PhaseRecovery rec = recover_phases(state.theta, prob, opts.residual_rel_tol);
  result.recovery_error = rec.recovery_error;

  const CMat theta_rec = lifted_phase_matrix(rec.phases);
  const double rate_rec = g_tilde(theta_rec, prob) - f_tilde(theta_rec, prob);
  if (rate_rec >= rate_initial - 1e-6) {
    result.phases = rec.phases;
    result.improved = true;
  } else {
    // never hand a worse point back to the outer loop
    result.phases = initial;
    result.improved = false;
  }
  return result;
}

}  // namespace irscr
