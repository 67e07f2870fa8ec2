#pragma once

// The two comparison schemes: zero-forcing with randomly drawn IRS phases
// (directions fixed, powers optimized), and SCA beamforming with no IRS at
// all.

#include <cstdint>

#include "irscr/ao.hpp"
#include "irscr/types.hpp"

namespace irscr {

struct BaselineResult {
  BeamformerSet beams;
  PhaseConfig phases;  // empty for the no-IRS baseline
  double rate = 0.0;
};

// Baseline 1: draw random phases, fix unit-norm ZF directions that null the
// other SUs' effective channels, then optimize the per-user powers under the
// power budget and leakage tolerances (convex, solved through the conic
// layer). Requires n_t >= k_users.
BaselineResult baseline1_zf_random_phase(const ChannelSet& ch,
                                         const BudgetConfig& budgets,
                                         std::uint64_t seed,
                                         const conic::SolverOptions& opts = {});

// Baseline 2: no IRS deployed; the beamforming SCA runs on the direct
// channels (same code path as the full algorithm with m = 0).
BaselineResult baseline2_no_irs(const ChannelSet& ch, const BudgetConfig& budgets,
                                const AoConfig& cfg = {});

// The fixed ZF directions for given effective channels; unit columns, column
// k orthogonal to every g_eff[r], r != k. Exposed for testing.
std::vector<CVec> zf_directions(const std::vector<CVec>& g_eff);

}  // namespace irscr
