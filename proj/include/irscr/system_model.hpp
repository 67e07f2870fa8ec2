#pragma once

// Algebraic core of the secondary-network model: effective channels through
// the IRS, SINR / sum-rate / leakage in vector form, and the two lifted trace
// forms used by the convex subproblems. Everything here is a pure function;
// the optimizer modules are tested against these definitions.

#include "irscr/types.hpp"

namespace irscr {

// g~_k = g_d[k] + F^H Psi^H g_r[k]
CVec effective_su_channel(const ChannelSet& ch, const PhaseConfig& phases, int k);

// l~_i = l_d[i] + F^H Psi^H l_r[i]
CVec effective_pu_channel(const ChannelSet& ch, const PhaseConfig& phases, int i);

// |g~_k^H w_k|^2 / (sum_{r != k} |g~_k^H w_r|^2 + noise_k)
double sinr(const ChannelSet& ch, const PhaseConfig& phases,
            const BeamformerSet& beams, int k);

// sum_k log2(1 + sinr_k)
double sum_rate(const ChannelSet& ch, const PhaseConfig& phases,
                const BeamformerSet& beams);

// sum_k |l~_i^H w_k|^2, the interference power received at PU i
double leakage(const ChannelSet& ch, const PhaseConfig& phases,
               const BeamformerSet& beams, int i);

// G_k = [ (diag(g_r[k]^H) F)^T   g_d[k]^* ]^T, (m+1) x n_t.
// Row m (the last one) is g_d[k]^H.
CMat lift_su_channel(const ChannelSet& ch, int k);

// L_i, same construction with the PU channels.
CMat lift_pu_channel(const ChannelSet& ch, int i);

// theta~ = rho * [e^{-j psi_1}, ..., e^{-j psi_m}, 1]^T with |rho| = 1 a free
// global rotation. The sign convention matches the lifted trace identity:
// |g_d^H w + g_r^H Psi F w|^2 = Tr(theta~ theta~^H G W G^H).
CVec lifted_phase_vector(const PhaseConfig& phases, Cplx rho = Cplx(1.0, 0.0));

// Theta = theta~ theta~^H
CMat lifted_phase_matrix(const PhaseConfig& phases, Cplx rho = Cplx(1.0, 0.0));

// SINR of user k in the W-trace form:
//   Tr(g~_k g~_k^H W_k) / (sum_{r != k} Tr(g~_k g~_k^H W_r) + noise)
double sinr_trace_w(const LiftedBeamSet& lifted, const std::vector<CVec>& g_eff,
                    const RVec& noise, int k);

// SINR of user k in the Theta-trace form:
//   Tr(Theta G_k W_k G_k^H) / (sum_{r != k} Tr(Theta G_k W_r G_k^H) + noise)
double sinr_trace_theta(const CMat& theta_mat, const std::vector<CMat>& g_lift,
                        const LiftedBeamSet& lifted, const RVec& noise, int k);

// Leakage at PU i in the W-trace form: sum_k Tr(l~_i l~_i^H W_k)
double leakage_trace_w(const LiftedBeamSet& lifted, const CVec& l_eff);

// Leakage at PU i in the Theta-trace form: sum_k Tr(Theta L_i W_k L_i^H)
double leakage_trace_theta(const CMat& theta_mat, const CMat& l_lift,
                           const LiftedBeamSet& lifted);

// Outer products W_k = w_k w_k^H
LiftedBeamSet lift_beams(const BeamformerSet& beams);

// Joint rescaling of channels, noise and tolerances so that every SU noise
// power becomes 1 internally. SINR, sum rate and constraint feasibility are
// invariant, and beamformers need no back-mapping. Raw -90 dBm powers sit at
// 1e-12 W, which is hostile to conic-solver tolerances.
struct ConditionedScenario {
  ChannelSet channels;
  BudgetConfig budgets;
};
ConditionedScenario condition(const ChannelSet& ch, const BudgetConfig& budgets);

}  // namespace irscr
