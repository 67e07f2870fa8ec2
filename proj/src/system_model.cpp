#include "irscr/system_model.hpp"

#include <cmath>

namespace irscr {

void ChannelSet::validate() const {
  const ScenarioDims d = dims();
  d.validate();
  if (f_mat.size() > 0 && f_mat.cols() != d.n_t)
    throw DimensionError("ChannelSet: f_mat has " + std::to_string(f_mat.cols()) +
                         " columns, expected " + std::to_string(d.n_t));
  if (g_r.size() != g_d.size())
    throw DimensionError("ChannelSet: g_r/g_d user count mismatch");
  if (l_r.size() != l_d.size())
    throw DimensionError("ChannelSet: l_r/l_d user count mismatch");
  for (const auto& v : g_d)
    if (v.size() != d.n_t) throw DimensionError("ChannelSet: g_d length != n_t");
  for (const auto& v : l_d)
    if (v.size() != d.n_t) throw DimensionError("ChannelSet: l_d length != n_t");
  for (const auto& v : g_r)
    if (v.size() != d.m) throw DimensionError("ChannelSet: g_r length != m");
  for (const auto& v : l_r)
    if (v.size() != d.m) throw DimensionError("ChannelSet: l_r length != m");
  if (noise_power.size() != d.k_users)
    throw DimensionError("ChannelSet: noise_power length != k_users");
  for (Eigen::Index k = 0; k < noise_power.size(); ++k)
    if (!(noise_power[k] > 0.0))
      throw Error("ChannelSet: noise_power must be > 0");
}

namespace {

CVec effective_channel(const ChannelSet& ch, const PhaseConfig& phases,
                       const CVec& direct, const CVec& reflected) {
  const int m = static_cast<int>(ch.f_mat.rows());
  if (phases.m() != m)
    throw DimensionError("effective channel: phase count != IRS element count");
  if (m == 0) return direct;
  // F^H Psi^H r: conj(e^{j psi}) scales each IRS element of r
  CVec scaled(m);
  const CVec d = phases.psi_diag();
  for (int j = 0; j < m; ++j) scaled[j] = std::conj(d[j]) * reflected[j];
  return direct + ch.f_mat.adjoint() * scaled;
}

void check_user_index(int idx, int count, const char* what) {
  if (idx < 0 || idx >= count)
    throw std::out_of_range(std::string(what) + " index " + std::to_string(idx) +
                            " out of range [0," + std::to_string(count) + ")");
}

}  // namespace

CVec effective_su_channel(const ChannelSet& ch, const PhaseConfig& phases, int k) {
  check_user_index(k, static_cast<int>(ch.g_d.size()), "SU");
  return effective_channel(ch, phases, ch.g_d[k], ch.g_r[k]);
}

CVec effective_pu_channel(const ChannelSet& ch, const PhaseConfig& phases, int i) {
  check_user_index(i, static_cast<int>(ch.l_d.size()), "PU");
  return effective_channel(ch, phases, ch.l_d[i], ch.l_r[i]);
}

double sinr(const ChannelSet& ch, const PhaseConfig& phases,
            const BeamformerSet& beams, int k) {
  check_user_index(k, static_cast<int>(ch.g_d.size()), "SU");
  if (!(ch.noise_power[k] > 0.0)) throw Error("sinr: nonpositive noise power");
  const CVec g = effective_su_channel(ch, phases, k);
  double interference = 0.0;
  for (int r = 0; r < static_cast<int>(beams.w.size()); ++r) {
    if (r == k) continue;
    interference += std::norm(g.dot(beams.w[r]));  // Eigen dot conjugates g
  }
  const double signal = std::norm(g.dot(beams.w[k]));
  return signal / (interference + ch.noise_power[k]);
}

double sum_rate(const ChannelSet& ch, const PhaseConfig& phases,
                const BeamformerSet& beams) {
  double rate = 0.0;
  for (int k = 0; k < static_cast<int>(ch.g_d.size()); ++k)
    rate += std::log2(1.0 + sinr(ch, phases, beams, k));
  return rate;
}

double leakage(const ChannelSet& ch, const PhaseConfig& phases,
               const BeamformerSet& beams, int i) {
  check_user_index(i, static_cast<int>(ch.l_d.size()), "PU");
  const CVec l = effective_pu_channel(ch, phases, i);
  double p = 0.0;
  for (const auto& wk : beams.w) p += std::norm(l.dot(wk));
  return p;
}

namespace {

CMat lift_channel(const CMat& f_mat, const CVec& reflected, const CVec& direct) {
  const int m = static_cast<int>(f_mat.rows());
  const int n_t = static_cast<int>(direct.size());
  CMat lifted(m + 1, n_t);
  // rows 0..m-1: diag(r^H) F, i.e. row j = conj(r_j) * F.row(j)
  for (int j = 0; j < m; ++j)
    lifted.row(j) = std::conj(reflected[j]) * f_mat.row(j);
  lifted.row(m) = direct.adjoint();  // g_d^* transposed into the last row
  return lifted;
}

}  // namespace

CMat lift_su_channel(const ChannelSet& ch, int k) {
  check_user_index(k, static_cast<int>(ch.g_d.size()), "SU");
  return lift_channel(ch.f_mat, ch.g_r[k], ch.g_d[k]);
}

CMat lift_pu_channel(const ChannelSet& ch, int i) {
  check_user_index(i, static_cast<int>(ch.l_d.size()), "PU");
  return lift_channel(ch.f_mat, ch.l_r[i], ch.l_d[i]);
}

CVec lifted_phase_vector(const PhaseConfig& phases, Cplx rho) {
  // rho rotates the whole vector; Theta = theta~ theta~^H is invariant to it
  const int m = phases.m();
  CVec theta(m + 1);
  for (int j = 0; j < m; ++j) theta[j] = rho * std::polar(1.0, -phases.psi[j]);
  theta[m] = rho;
  return theta;
}

CMat lifted_phase_matrix(const PhaseConfig& phases, Cplx rho) {
  const CVec theta = lifted_phase_vector(phases, rho);
  return theta * theta.adjoint();
}

double sinr_trace_w(const LiftedBeamSet& lifted, const std::vector<CVec>& g_eff,
                    const RVec& noise, int k) {
  check_user_index(k, static_cast<int>(g_eff.size()), "SU");
  const CVec& g = g_eff[k];
  double signal = 0.0, interference = 0.0;
  for (int r = 0; r < static_cast<int>(lifted.w_mat.size()); ++r) {
    // Tr(g g^H W) = g^H W g
    const double t = std::real(g.dot(lifted.w_mat[r] * g));
    if (r == k)
      signal = t;
    else
      interference += t;
  }
  return signal / (interference + noise[k]);
}

double sinr_trace_theta(const CMat& theta_mat, const std::vector<CMat>& g_lift,
                        const LiftedBeamSet& lifted, const RVec& noise, int k) {
  check_user_index(k, static_cast<int>(g_lift.size()), "SU");
  const CMat& G = g_lift[k];
  double signal = 0.0, interference = 0.0;
  for (int r = 0; r < static_cast<int>(lifted.w_mat.size()); ++r) {
    const double t =
        std::real((theta_mat * (G * lifted.w_mat[r] * G.adjoint())).trace());
    if (r == k)
      signal = t;
    else
      interference += t;
  }
  return signal / (interference + noise[k]);
}

double leakage_trace_w(const LiftedBeamSet& lifted, const CVec& l_eff) {
  double p = 0.0;
  for (const auto& W : lifted.w_mat) p += std::real(l_eff.dot(W * l_eff));
  return p;
}

double leakage_trace_theta(const CMat& theta_mat, const CMat& l_lift,
                           const LiftedBeamSet& lifted) {
  double p = 0.0;
  for (const auto& W : lifted.w_mat)
    p += std::real((theta_mat * (l_lift * W * l_lift.adjoint())).trace());
  return p;
}

LiftedBeamSet lift_beams(const BeamformerSet& beams) {
  LiftedBeamSet lifted;
  lifted.w_mat.reserve(beams.w.size());
  for (const auto& wk : beams.w) lifted.w_mat.push_back(wk * wk.adjoint());
  return lifted;
}

ConditionedScenario condition(const ChannelSet& ch, const BudgetConfig& budgets) {
  ch.validate();
  ConditionedScenario out;
  out.channels = ch;
  out.budgets = budgets;

  // Per-SU: scale that receiver's channels by 1/sigma_k, noise becomes 1.
  for (int k = 0; k < static_cast<int>(ch.g_d.size()); ++k) {
    const double s = 1.0 / std::sqrt(ch.noise_power[k]);
    out.channels.g_d[k] *= s;
    if (out.channels.g_r[k].size() > 0) out.channels.g_r[k] *= s;
    out.channels.noise_power[k] = 1.0;
  }
  // Per-PU: scale channels and tolerance together; align with the SU noise
  // scale (geometric mean) so all traces live near the same magnitude.
  double log_scale = 0.0;
  for (Eigen::Index k = 0; k < ch.noise_power.size(); ++k)
    log_scale += std::log(ch.noise_power[k]);
  const double sigma2_ref = std::exp(log_scale / std::max<Eigen::Index>(1, ch.noise_power.size()));
  const double s2 = 1.0 / sigma2_ref;
  const double s = std::sqrt(s2);
  for (int i = 0; i < static_cast<int>(ch.l_d.size()); ++i) {
    out.channels.l_d[i] *= s;
    if (out.channels.l_r[i].size() > 0) out.channels.l_r[i] *= s;
    out.budgets.p_tol[i] = budgets.p_tol[i] * s2;
  }
  return out;
}

}  // namespace irscr
