#include "irscr/beamforming.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "irscr/system_model.hpp"

namespace irscr {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// interference-plus-noise at user t: sum_{r != t} Tr(g~_t g~_t^H W_r) + sigma_t^2
double interference_at(const LiftedBeamSet& lifted, const FixedPhaseProblem& prob,
                       int t) {
  const CVec& g = prob.g_eff[t];
  double v = prob.noise[t];
  for (int r = 0; r < prob.k_users(); ++r) {
    if (r == t) continue;
    v += std::real(g.dot(lifted.w_mat[r] * g));
  }
  return v;
}

double received_at(const LiftedBeamSet& lifted, const FixedPhaseProblem& prob,
                   int t) {
  const CVec& g = prob.g_eff[t];
  double v = prob.noise[t];
  for (int r = 0; r < prob.k_users(); ++r)
    v += std::real(g.dot(lifted.w_mat[r] * g));
  return v;
}

}  // namespace

FixedPhaseProblem make_fixed_phase_problem(const ChannelSet& ch,
                                           const PhaseConfig& phases,
                                           const BudgetConfig& budgets) {
  FixedPhaseProblem prob;
  const ScenarioDims dims = ch.dims();
  prob.g_eff.reserve(dims.k_users);
  for (int k = 0; k < dims.k_users; ++k)
    prob.g_eff.push_back(effective_su_channel(ch, phases, k));
  prob.l_eff.reserve(dims.i_users);
  for (int i = 0; i < dims.i_users; ++i)
    prob.l_eff.push_back(effective_pu_channel(ch, phases, i));
  prob.noise = ch.noise_power;
  prob.budgets = budgets;
  return prob;
}

double f_value(const LiftedBeamSet& lifted, const FixedPhaseProblem& prob) {
  double f = 0.0;
  for (int k = 0; k < prob.k_users(); ++k) {
    const double a = received_at(lifted, prob, k);
    if (!(a > 0.0)) throw Error("f_value: nonpositive log argument");
    f -= std::log2(a);
  }
  return f;
}

double g_value(const LiftedBeamSet& lifted, const FixedPhaseProblem& prob) {
  double g = 0.0;
  for (int k = 0; k < prob.k_users(); ++k) {
    const double a = interference_at(lifted, prob, k);
    if (!(a > 0.0)) throw Error("g_value: nonpositive log argument");
    g -= std::log2(a);
  }
  return g;
}

CMat grad_g(const LiftedBeamSet& lifted, const FixedPhaseProblem& prob, int k) {
  const int n = prob.n_t();
  CMat grad = CMat::Zero(n, n);
  for (int t = 0; t < prob.k_users(); ++t) {
    if (t == k) continue;
    const double denom = interference_at(lifted, prob, t);
    grad -= (prob.g_eff[t] * prob.g_eff[t].adjoint()) / (kLn2 * denom);
  }
  return grad;
}

double underestimate_g(const LiftedBeamSet& at, const LiftedBeamSet& query,
                       const FixedPhaseProblem& prob) {
  double v = g_value(at, prob);
  for (int k = 0; k < prob.k_users(); ++k) {
    const CMat d = grad_g(at, prob, k);
    v += std::real((d.adjoint() * (query.w_mat[k] - at.w_mat[k])).trace());
  }
  return v;
}

BeamSubproblemState solve_beam_iteration(const BeamSubproblemState& state,
                                         const FixedPhaseProblem& prob,
                                         const conic::SolverOptions& opts) {
  const int n = prob.n_t();
  const int kk = prob.k_users();

  // Exact-zero tolerances carve out the orthogonal complement of the
  // offending PU channels; with those directions projected away the reduced
  // problem has a strict interior again. basis: n x d, columns orthonormal.
  CMat basis = CMat::Identity(n, n);
  {
    std::vector<int> hard;
    for (int i = 0; i < prob.i_users(); ++i)
      if (prob.budgets.p_tol[i] == 0.0 && prob.l_eff[i].norm() > 0.0)
        hard.push_back(i);
    if (!hard.empty()) {
      CMat stack(n, static_cast<int>(hard.size()));
      for (std::size_t c = 0; c < hard.size(); ++c)
        stack.col(c) = prob.l_eff[hard[c]];
      Eigen::JacobiSVD<CMat> svd(stack, Eigen::ComputeFullU);
      const double thresh = 1e-12 * svd.singularValues().maxCoeff();
      int rank = 0;
      for (Eigen::Index s = 0; s < svd.singularValues().size(); ++s)
        if (svd.singularValues()[s] > thresh) ++rank;
      basis = svd.matrixU().rightCols(n - rank);
    }
  }
  const int d = static_cast<int>(basis.cols());

  BeamSubproblemState next;
  next.iter = state.iter + 1;
  next.surrogate_history = state.surrogate_history;
  next.rate_history = state.rate_history;

  if (d == 0) {  // only the zero beamformer is feasible
    next.w_mat.w_mat.assign(kk, CMat::Zero(n, n));
    LiftedBeamSet& wz = next.w_mat;
    next.surrogate_history.push_back(f_value(wz, prob) -
                                     underestimate_g(state.w_mat, wz, prob));
    next.rate_history.push_back(0.0);
    return next;
  }

  auto reduce = [&](const CMat& a) -> CMat {
    return basis.adjoint() * a * basis;
  };

  // The conic variables are W_k / p_max so the solver always works at unit
  // scale; the channel kernels absorb p_max.
  const double scale = prob.budgets.p_max;

  conic::ConicProblem cp;
  std::vector<conic::VarRef> vars(kk);
  for (int k = 0; k < kk; ++k) vars[k] = cp.add_psd_var(d);

  // f: one log term per user over all W_r
  for (int k = 0; k < kk; ++k) {
    const CMat outer =
        scale * reduce(prob.g_eff[k] * prob.g_eff[k].adjoint());
    std::vector<std::pair<conic::VarRef, CMat>> terms;
    for (int r = 0; r < kk; ++r) terms.emplace_back(vars[r], outer);
    cp.add_log_cost(1.0 / kLn2, prob.noise[k], terms);
  }
  // -g^: linearization of g at the current iterate
  double lin_const = g_value(state.w_mat, prob);
  for (int k = 0; k < kk; ++k) {
    const CMat dk = grad_g(state.w_mat, prob, k);
    cp.add_linear_cost(vars[k], -scale * reduce(dk));
    lin_const -= std::real((dk.adjoint() * state.w_mat.w_mat[k]).trace());
  }
  cp.add_constant_cost(-lin_const);

  // C1: total power (normalized to 1)
  {
    std::vector<std::pair<conic::VarRef, CMat>> terms;
    for (int k = 0; k < kk; ++k)
      terms.emplace_back(vars[k], CMat::Identity(d, d));
    cp.add_trace_constraint(terms, conic::ConicProblem::Sense::less_equal, 1.0);
  }
  // C3 (lifted): per-PU leakage, skipping the projected-out hard zeros
  for (int i = 0; i < prob.i_users(); ++i) {
    if (prob.budgets.p_tol[i] == 0.0) continue;
    const CMat outer =
        scale * reduce(prob.l_eff[i] * prob.l_eff[i].adjoint());
    if (outer.cwiseAbs().maxCoeff() == 0.0) continue;
    std::vector<std::pair<conic::VarRef, CMat>> terms;
    for (int k = 0; k < kk; ++k) terms.emplace_back(vars[k], outer);
    cp.add_trace_constraint(terms, conic::ConicProblem::Sense::less_equal,
                            prob.budgets.p_tol[i]);
  }

  for (int k = 0; k < kk; ++k)
    cp.set_initial_point(vars[k], reduce(state.w_mat.w_mat[k]) / scale);

  const conic::ConicSolution sol = cp.solve(opts);
  if (sol.status == conic::SolveStatus::infeasible)
    throw SolverFailure("beam subproblem reported infeasible");
  if (sol.status == conic::SolveStatus::numerical_failure)
    throw SolverFailure("beam subproblem numerical failure");

  next.w_mat.w_mat.resize(kk);
  for (int k = 0; k < kk; ++k)
    next.w_mat.w_mat[k] = scale * (basis * sol.vars[k] * basis.adjoint());
  next.conic_gap = sol.gap;
  next.surrogate_history.push_back(
      f_value(next.w_mat, prob) -
      underestimate_g(state.w_mat, next.w_mat, prob));
  next.rate_history.push_back(g_value(next.w_mat, prob) -
                              f_value(next.w_mat, prob));
  return next;
}

RankOneExtraction extract_rank_one(const CMat& w_mat) {
  RankOneExtraction out;
  const int n = static_cast<int>(w_mat.rows());
  Eigen::SelfAdjointEigenSolver<CMat> es(w_mat);
  const RVec ev = es.eigenvalues();  // ascending
  const double top = ev[n - 1];
  if (top <= 0.0) {
    out.w = CVec::Zero(n);
    out.residual = 0.0;
    return out;
  }
  out.w = std::sqrt(top) * es.eigenvectors().col(n - 1);
  const double second = (n >= 2) ? std::max(0.0, ev[n - 2]) : 0.0;
  out.residual = second / top;
  return out;
}

BeamformerSet mrt_initial_beams(const FixedPhaseProblem& prob) {
  const int n = prob.n_t();
  const int kk = prob.k_users();
  BeamformerSet beams;
  beams.w.resize(kk);
  const double per_user = prob.budgets.p_max / kk;
  for (int k = 0; k < kk; ++k) {
    const double nrm = prob.g_eff[k].norm();
    beams.w[k] = (nrm > 0.0) ? CVec(std::sqrt(per_user) / nrm * prob.g_eff[k])
                             : CVec(CVec::Zero(n));
  }
  // leakage is homogeneous of degree 2, so the binding scale is a square root
  double c2 = 1.0;
  for (int i = 0; i < prob.i_users(); ++i) {
    double leak = 0.0;
    for (const auto& wk : beams.w) leak += std::norm(prob.l_eff[i].dot(wk));
    if (leak > 0.0) c2 = std::min(c2, prob.budgets.p_tol[i] / leak);
  }
  const double c = std::sqrt(std::max(0.0, c2));
  for (auto& wk : beams.w) wk *= c;
  return beams;
}

BeamResult run_beamforming_sca(const LiftedBeamSet& initial,
                               const FixedPhaseProblem& prob,
                               const BeamSolveOptions& opts) {
  BeamSubproblemState state;
  state.w_mat = initial;
  const double rate_initial =
      g_value(state.w_mat, prob) - f_value(state.w_mat, prob);
  state.rate_history.push_back(rate_initial);

  BeamResult result;
  result.converged = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    const double prev = state.rate_history.back();
    state = solve_beam_iteration(state, prob, opts.conic);
    const double cur = state.rate_history.back();
    if (std::abs(cur - prev) <= opts.tol_inner * std::max(1.0, std::abs(prev))) {
      result.converged = true;
      break;
    }
  }

  const int sca_iterations = state.iter;

  // One tight polish solve. Near a user switch-off the objective is flat in
  // that user's matrix, so a loosely solved iterate can carry junk mass that
  // corrupts the rank certification; driving the gap down removes it.
  {
    conic::SolverOptions tight = opts.conic;
    tight.rel_tol = std::min(tight.rel_tol, 1e-10);
    tight.abs_tol = std::min(tight.abs_tol, 1e-11);
    tight.max_newton = std::max(tight.max_newton, 1200);
    state = solve_beam_iteration(state, prob, tight);
  }

  result.iterations = sca_iterations;
  result.rate_history = state.rate_history;
  result.lifted = state.w_mat;

  // Extraction. A user the optimizer switched off leaves a matrix at the
  // solver's noise floor; its singular-value ratio is meaningless, so such
  // beams are classified as zero (rank 0) instead of certified.
  std::vector<RankOneExtraction> ex(prob.k_users());
  double top_scale = 0.0;
  for (int k = 0; k < prob.k_users(); ++k) {
    ex[k] = extract_rank_one(state.w_mat.w_mat[k]);
    top_scale = std::max(top_scale, ex[k].w.squaredNorm());
  }
  const double zero_tol = std::max(1e-8 * top_scale,
                                   16.0 * state.conic_gap * prob.budgets.p_max);
  result.beams.w.resize(prob.k_users());
  result.rank_residuals.resize(prob.k_users());
  for (int k = 0; k < prob.k_users(); ++k) {
    if (ex[k].w.squaredNorm() <= zero_tol) {
      result.beams.w[k] = CVec::Zero(prob.n_t());
      result.rank_residuals[k] = 0.0;
      continue;
    }
    if (ex[k].residual > opts.rank_tol)
      throw RankResidualError(
          "beam matrix " + std::to_string(k) + " rank residual " +
          std::to_string(ex[k].residual) + " exceeds " +
          std::to_string(opts.rank_tol));
    result.beams.w[k] = ex[k].w;
    result.rank_residuals[k] = ex[k].residual;
  }

  // extraction can only shed power and leakage, but guard the rate anyway so
  // the outer loop sees a monotone sequence unconditionally
  const double rate_extracted =
      g_value(lift_beams(result.beams), prob) -
      f_value(lift_beams(result.beams), prob);
  if (rate_extracted < rate_initial) {
    RankOneExtraction fallback;
    bool initial_is_rank_one = true;
    for (int k = 0; k < prob.k_users(); ++k) {
      fallback = extract_rank_one(initial.w_mat[k]);
      if (fallback.residual > opts.rank_tol &&
          fallback.w.squaredNorm() > zero_tol) {
        initial_is_rank_one = false;
        break;
      }
    }
    if (initial_is_rank_one) {
      for (int k = 0; k < prob.k_users(); ++k)
        result.beams.w[k] = extract_rank_one(initial.w_mat[k]).w;
      result.rate_history.push_back(rate_initial);
    }
  }
  return result;
}

}  // namespace irscr
