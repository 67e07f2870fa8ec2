#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irscr {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

class SolverFailure : public Error {
 public:
  explicit SolverFailure(const std::string& msg) : Error(msg) {}
};

// Raised when a matrix that should be (near) rank-one is not; callers must
// treat this as a diagnostic, not project silently.
class RankResidualError : public Error {
 public:
  explicit RankResidualError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Antenna / element / user counts of one scenario.
struct ScenarioDims {
  int n_t = 1;      // BS transmit antennas
  int m = 0;        // IRS elements, 0 means no IRS deployed
  int k_users = 1;  // secondary users
  int i_users = 0;  // primary users

  void validate() const {
    if (n_t < 1) throw DimensionError("ScenarioDims: n_t must be >= 1");
    if (m < 0) throw DimensionError("ScenarioDims: m must be >= 0");
    if (k_users < 1) throw DimensionError("ScenarioDims: k_users must be >= 1");
    if (i_users < 0) throw DimensionError("ScenarioDims: i_users must be >= 0");
  }
};

// All propagation data of one realization. Dimensions:
//   f_mat  : m x n_t   (BS -> IRS)
//   g_d[k] : n_t       (BS -> SU k)
//   g_r[k] : m         (IRS -> SU k)
//   l_d[i] : n_t       (BS -> PU i)
//   l_r[i] : m         (IRS -> PU i)
// noise_power[k] is the equivalent noise power at SU k in watts.
// pu_noise_power[i] is the noise power at PU i; it is carried for
// completeness but consumed by nothing downstream.
struct ChannelSet {
  CMat f_mat;
  std::vector<CVec> g_d;
  std::vector<CVec> g_r;
  std::vector<CVec> l_d;
  std::vector<CVec> l_r;
  RVec noise_power;
  RVec pu_noise_power;

  ScenarioDims dims() const {
    ScenarioDims d;
    d.k_users = static_cast<int>(g_d.size());
    d.i_users = static_cast<int>(l_d.size());
    d.m = static_cast<int>(f_mat.rows());
    d.n_t = g_d.empty() ? static_cast<int>(f_mat.cols())
                        : static_cast<int>(g_d[0].size());
    return d;
  }

  void validate() const;
};

// IRS phase shifts, radians. The reflection matrix is
// Psi = diag(e^{j psi_1}, ..., e^{j psi_m}).
struct PhaseConfig {
  RVec psi;

  int m() const { return static_cast<int>(psi.size()); }

  // diag(e^{j psi_m}) as a dense diagonal vector
  CVec psi_diag() const {
    CVec d(psi.size());
    for (Eigen::Index i = 0; i < psi.size(); ++i)
      d[i] = std::polar(1.0, psi[i]);
    return d;
  }
};

// One beamforming vector per SU.
struct BeamformerSet {
  std::vector<CVec> w;

  double total_power() const {
    double p = 0.0;
    for (const auto& wk : w) p += wk.squaredNorm();
    return p;
  }
};

// Lifted beamforming matrices W_k = w_k w_k^H (Hermitian PSD during SDR).
struct LiftedBeamSet {
  std::vector<CMat> w_mat;
};

// Lifted phase matrix Theta = theta~ theta~^H, (m+1) x (m+1), Hermitian PSD
// with unit diagonal at feasible points.
struct LiftedPhase {
  CMat theta_mat;
};

// Power budget and per-PU interference tolerances, watts.
struct BudgetConfig {
  double p_max = 1.0;
  RVec p_tol;

  void validate() const {
    if (!(p_max > 0.0)) throw ConfigError("BudgetConfig: p_max must be > 0");
    for (Eigen::Index i = 0; i < p_tol.size(); ++i)
      if (p_tol[i] < 0.0)
        throw ConfigError("BudgetConfig: p_tol must be >= 0");
  }
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

}  // namespace irscr
