#pragma once

// Outer alternating loop: beamformers for fixed phases, phases for fixed
// beamformers, until the relative sum-rate change drops below eps_ao. The
// sum-rate sequence is non-decreasing by construction (each block is a
// majorize-minimize step and the phase block falls back rather than regress),
// and feasibility of the returned point is re-verified against the model
// definitions, never taken from solver state.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "irscr/beamforming.hpp"
#include "irscr/irs_opt.hpp"
#include "irscr/types.hpp"

namespace irscr {

struct AoConfig {
  double eps_ao = 0.01;
  int max_outer_iter = 50;
  BeamSolveOptions beam;
  IrsSolveOptions irs;
  std::uint64_t seed = 0;  // drives the random initial phases

  void validate() const {
    if (eps_ao < 0.0 || eps_ao >= 1.0)
      throw ConfigError("AoConfig: eps_ao must satisfy 0 <= eps_ao < 1");
    if (max_outer_iter < 1)
      throw ConfigError("AoConfig: max_outer_iter must be >= 1");
  }
};

// Independent re-evaluation of every constraint via the model operations.
struct SlackReport {
  double total_power = 0.0;
  double power_budget = 0.0;
  double power_slack_rel = 0.0;  // (budget - used) / budget
  RVec leakage;                  // per PU
  RVec leakage_slack_rel;        // (p_tol - leakage) / max(p_tol, tiny)
  double max_phase_modulus_dev = 0.0;

  // worst relative violation, 0 when feasible
  double worst_violation() const;
  bool feasible(double rel_tol) const { return worst_violation() <= rel_tol; }
};

struct OuterRecord {
  int iter = 0;
  double sum_rate = 0.0;
  double power_slack_rel = 0.0;
  double min_leakage_slack_rel = 0.0;
  int beam_inner_iters = 0;
  int irs_inner_iters = 0;
  double beam_rank_residual_max = 0.0;
  double theta_rank_residual = 0.0;
  double chi_final = 0.0;
  bool irs_improved = true;
  double wall_ms = 0.0;
};

struct AoTrace {
  std::vector<OuterRecord> outer;
  double initial_rate = 0.0;
  double final_rate = 0.0;
  bool converged = false;  // stopped by the eps_ao criterion
  bool cap_hit = false;
  std::string status = "ok";

  void write_log(std::ostream& os) const;   // line-oriented text log
  std::string to_json() const;              // structured record
};

struct AoResult {
  BeamformerSet beams;
  PhaseConfig phases;
  AoTrace trace;
};

// Algorithm entry point. Channels are conditioned internally; the returned
// beams and phases are valid against the original channel set.
AoResult optimize(const ChannelSet& ch, const BudgetConfig& budgets,
                  const AoConfig& cfg);

SlackReport check_feasibility(const ChannelSet& ch, const BeamformerSet& beams,
                              const PhaseConfig& phases,
                              const BudgetConfig& budgets);

// Uniform random phases in [0, 2pi), the standard initializer.
PhaseConfig random_phases(int m, std::uint64_t seed);

}  // namespace irscr
