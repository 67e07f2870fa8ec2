#include "irscr/ao.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "irscr/rng.hpp"
#include "irscr/system_model.hpp"

namespace irscr {

double SlackReport::worst_violation() const {
  double v = std::max(0.0, -power_slack_rel);
  for (Eigen::Index i = 0; i < leakage_slack_rel.size(); ++i)
    v = std::max(v, -leakage_slack_rel[i]);
  v = std::max(v, max_phase_modulus_dev);
  return v;
}

SlackReport check_feasibility(const ChannelSet& ch, const BeamformerSet& beams,
                              const PhaseConfig& phases,
                              const BudgetConfig& budgets) {
  SlackReport rep;
  rep.total_power = beams.total_power();
  rep.power_budget = budgets.p_max;
  rep.power_slack_rel = (budgets.p_max - rep.total_power) / budgets.p_max;

  const int i_users = static_cast<int>(ch.l_d.size());
  rep.leakage.resize(i_users);
  rep.leakage_slack_rel.resize(i_users);
  for (int i = 0; i < i_users; ++i) {
    rep.leakage[i] = leakage(ch, phases, beams, i);
    const double denom = std::max(budgets.p_tol[i], 1e-300);
    rep.leakage_slack_rel[i] = (budgets.p_tol[i] - rep.leakage[i]) / denom;
  }

  const CVec d = phases.psi_diag();
  for (Eigen::Index j = 0; j < d.size(); ++j)
    rep.max_phase_modulus_dev =
        std::max(rep.max_phase_modulus_dev, std::abs(std::abs(d[j]) - 1.0));
  return rep;
}

PhaseConfig random_phases(int m, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x70687361ULL));  // "phsa"
  PhaseConfig p;
  p.psi.resize(m);
  for (int j = 0; j < m; ++j) p.psi[j] = rng.uniform(0.0, 2.0 * M_PI);
  return p;
}

void AoTrace::write_log(std::ostream& os) const {
  os << "# iter sum_rate power_slack_rel min_leak_slack_rel beam_iters irs_iters"
        " beam_rank_resid theta_rank_resid chi irs_improved wall_ms\n";
  for (const auto& r : outer) {
    os << r.iter << " " << r.sum_rate << " " << r.power_slack_rel << " "
       << r.min_leakage_slack_rel << " " << r.beam_inner_iters << " "
       << r.irs_inner_iters << " " << r.beam_rank_residual_max << " "
       << r.theta_rank_residual << " " << r.chi_final << " "
       << (r.irs_improved ? 1 : 0) << " " << r.wall_ms << "\n";
  }
  os << "# status=" << status << " converged=" << (converged ? 1 : 0)
     << " cap_hit=" << (cap_hit ? 1 : 0) << " final_rate=" << final_rate << "\n";
}

std::string AoTrace::to_json() const {
  nlohmann::json j;
  j["initial_rate"] = initial_rate;
  j["final_rate"] = final_rate;
  j["converged"] = converged;
  j["cap_hit"] = cap_hit;
  j["status"] = status;
  j["outer"] = nlohmann::json::array();
  for (const auto& r : outer) {
    j["outer"].push_back({{"iter", r.iter},
                          {"sum_rate", r.sum_rate},
                          {"power_slack_rel", r.power_slack_rel},
                          {"min_leakage_slack_rel", r.min_leakage_slack_rel},
                          {"beam_inner_iters", r.beam_inner_iters},
                          {"irs_inner_iters", r.irs_inner_iters},
                          {"beam_rank_residual_max", r.beam_rank_residual_max},
                          {"theta_rank_residual", r.theta_rank_residual},
                          {"chi_final", r.chi_final},
                          {"irs_improved", r.irs_improved},
                          {"wall_ms", r.wall_ms}});
  }
  return j.dump(1);
}

AoResult optimize(const ChannelSet& ch, const BudgetConfig& budgets,
                  const AoConfig& cfg) {
  cfg.validate();
  budgets.validate();
  ch.validate();
  const ScenarioDims dims = ch.dims();
  if (budgets.p_tol.size() != dims.i_users)
    throw ConfigError("optimize: p_tol count must match PU count");

  // all optimization happens on the conditioned copy; beams and phases are
  // valid for both
  const ConditionedScenario cond = condition(ch, budgets);

  AoResult result;
  result.phases = random_phases(dims.m, cfg.seed);

  FixedPhaseProblem beam_prob =
      make_fixed_phase_problem(cond.channels, result.phases, cond.budgets);
  result.beams = mrt_initial_beams(beam_prob);

  double rate = sum_rate(cond.channels, result.phases, result.beams);
  result.trace.initial_rate = rate;

  for (int outer = 1; outer <= cfg.max_outer_iter; ++outer) {
    const auto t0 = std::chrono::steady_clock::now();
    OuterRecord rec;
    rec.iter = outer;

    try {
      // block 1: beamformers for fixed phases
      beam_prob = make_fixed_phase_problem(cond.channels, result.phases,
                                           cond.budgets);
      const BeamResult br =
          run_beamforming_sca(lift_beams(result.beams), beam_prob, cfg.beam);
      result.beams = br.beams;
      rec.beam_inner_iters = br.iterations;
      for (double r : br.rank_residuals)
        rec.beam_rank_residual_max = std::max(rec.beam_rank_residual_max, r);

      // block 2: phases for fixed beamformers
      if (dims.m > 0) {
        const FixedBeamProblem irs_prob =
            make_fixed_beam_problem(cond.channels, result.beams, cond.budgets);
        const IrsResult ir = run_irs_sca(result.phases, irs_prob, cfg.irs);
        result.phases = ir.phases;
        rec.irs_inner_iters = ir.iterations;
        rec.theta_rank_residual = ir.rank_residual;
        rec.chi_final = ir.chi_final;
        rec.irs_improved = ir.improved;
      }
    } catch (const Error& err) {
      // keep the last feasible iterate and report instead of propagating
      result.trace.status = std::string("subproblem-failure: ") + err.what();
      result.trace.final_rate = rate;
      return result;
    }

    const double new_rate = sum_rate(cond.channels, result.phases, result.beams);
    const SlackReport slack =
        check_feasibility(cond.channels, result.beams, result.phases,
                          cond.budgets);
    rec.sum_rate = new_rate;
    rec.power_slack_rel = slack.power_slack_rel;
    rec.min_leakage_slack_rel = slack.leakage_slack_rel.size() > 0
                                    ? slack.leakage_slack_rel.minCoeff()
                                    : 1.0;
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.trace.outer.push_back(rec);

    const double denom = std::max(std::abs(rate), 1e-12);
    const bool done = std::abs(new_rate - rate) / denom <= cfg.eps_ao;
    rate = new_rate;
    if (done) {
      result.trace.converged = true;
      break;
    }
  }
  result.trace.cap_hit = !result.trace.converged;
  if (result.trace.cap_hit) result.trace.status = "cap-hit";
  result.trace.final_rate = rate;
  return result;
}

}  // namespace irscr
