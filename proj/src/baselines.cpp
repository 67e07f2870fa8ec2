#include "irscr/baselines.hpp"

#include <cmath>

#include "irscr/channel_gen.hpp"
#include "irscr/system_model.hpp"

namespace irscr {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

std::vector<CVec> zf_directions(const std::vector<CVec>& g_eff) {
  const int kk = static_cast<int>(g_eff.size());
  const int n = static_cast<int>(g_eff[0].size());
  if (n < kk)
    throw Error("zf_directions: need n_t >= k_users for a ZF null space");
  std::vector<CVec> dirs(kk);
  for (int k = 0; k < kk; ++k) {
    if (kk == 1) {
      const double nrm = g_eff[0].norm();
      dirs[0] = nrm > 0.0 ? CVec(g_eff[0] / nrm) : CVec(CVec::Unit(n, 0));
      continue;
    }
    CMat others(n, kk - 1);
    int c = 0;
    for (int r = 0; r < kk; ++r)
      if (r != k) others.col(c++) = g_eff[r];
    // project g_k onto the orthogonal complement of the other users' channels
    const Eigen::CompleteOrthogonalDecomposition<CMat> cod(others);
    const CVec coeff = cod.solve(g_eff[k]);
    CVec w = g_eff[k] - others * coeff;
    const double nrm = w.norm();
    if (nrm < 1e-12 * std::max(1.0, g_eff[k].norm()))
      throw Error("zf_directions: channel " + std::to_string(k) +
                  " lies in the span of the others");
    dirs[k] = w / nrm;
  }
  return dirs;
}

BaselineResult baseline1_zf_random_phase(const ChannelSet& ch,
                                         const BudgetConfig& budgets,
                                         std::uint64_t seed,
                                         const conic::SolverOptions& opts) {
  ch.validate();
  budgets.validate();
  const ScenarioDims dims = ch.dims();
  if (dims.n_t < dims.k_users)
    throw Error("baseline1: requires n_t >= k_users");

  const ConditionedScenario cond = condition(ch, budgets);

  BaselineResult result;
  result.phases = random_phases(dims.m, seed);

  std::vector<CVec> g_eff(dims.k_users), l_eff(dims.i_users);
  for (int k = 0; k < dims.k_users; ++k)
    g_eff[k] = effective_su_channel(cond.channels, result.phases, k);
  for (int i = 0; i < dims.i_users; ++i)
    l_eff[i] = effective_pu_channel(cond.channels, result.phases, i);

  const std::vector<CVec> dirs = zf_directions(g_eff);

  // residual per-user gains through the fixed directions
  RVec snr_gain(dims.k_users);
  for (int k = 0; k < dims.k_users; ++k)
    snr_gain[k] =
        std::norm(g_eff[k].dot(dirs[k])) / cond.channels.noise_power[k];

  // maximize sum_k log2(1 + a_k p_k)  s.t.  sum p_k <= P, leakage, p_k >= 0;
  // powers live as 1x1 PSD variables, normalized by the budget
  const double scale = cond.budgets.p_max;
  conic::ConicProblem cp;
  std::vector<conic::VarRef> pv(dims.k_users);
  for (int k = 0; k < dims.k_users; ++k) pv[k] = cp.add_psd_var(1);
  CMat one = CMat::Identity(1, 1);
  for (int k = 0; k < dims.k_users; ++k) {
    if (snr_gain[k] > 0.0)
      cp.add_log_cost(1.0 / kLn2, 1.0, {{pv[k], scale * snr_gain[k] * one}});
  }
  {
    std::vector<std::pair<conic::VarRef, CMat>> terms;
    for (int k = 0; k < dims.k_users; ++k) terms.emplace_back(pv[k], one);
    cp.add_trace_constraint(terms, conic::ConicProblem::Sense::less_equal, 1.0);
  }
  for (int i = 0; i < dims.i_users; ++i) {
    std::vector<std::pair<conic::VarRef, CMat>> terms;
    double max_gain = 0.0;
    for (int k = 0; k < dims.k_users; ++k) {
      const double gain = std::norm(l_eff[i].dot(dirs[k]));
      max_gain = std::max(max_gain, gain);
      terms.emplace_back(pv[k], scale * gain * one);
    }
    // skip constraints no power allocation can violate
    if (max_gain * scale <= cond.budgets.p_tol[i] * (1.0 - 1e-9)) continue;
    cp.add_trace_constraint(terms, conic::ConicProblem::Sense::less_equal,
                            cond.budgets.p_tol[i]);
  }
  for (int k = 0; k < dims.k_users; ++k)
    cp.set_initial_point(pv[k], 1e-3 / dims.k_users * one);

  const conic::ConicSolution sol = cp.solve(opts);
  if (sol.status != conic::SolveStatus::optimal)
    throw SolverFailure(std::string("baseline1 power allocation: ") +
                        conic::to_string(sol.status));

  result.beams.w.resize(dims.k_users);
  for (int k = 0; k < dims.k_users; ++k) {
    const double p = scale * std::max(0.0, sol.vars[k](0, 0).real());
    result.beams.w[k] = std::sqrt(p) * dirs[k];
  }
  result.rate = sum_rate(ch, result.phases, result.beams);
  return result;
}

BaselineResult baseline2_no_irs(const ChannelSet& ch, const BudgetConfig& budgets,
                                const AoConfig& cfg) {
  const ChannelSet direct = strip_irs(ch);
  const AoResult ao = optimize(direct, budgets, cfg);
  BaselineResult result;
  result.beams = ao.beams;
  result.phases = ao.phases;  // empty: the stripped scenario has m = 0
  result.rate = ao.trace.final_rate;
  return result;
}

}  // namespace irscr
