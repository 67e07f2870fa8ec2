#pragma once

// Shared helpers for the test suites: seeded random problem data and naive
// re-implementations (plain loops, no Eigen expressions) used as independent
// oracles against the library's linear algebra.

#include <complex>
#include <vector>

#include "irscr/rng.hpp"
#include "irscr/types.hpp"

namespace irscr::test {

inline CVec random_cvec(Rng& rng, int n, double scale = 1.0) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.cgaussian();
  return v;
}

inline CMat random_cmat(Rng& rng, int rows, int cols, double scale = 1.0) {
  CMat a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r, c) = scale * rng.cgaussian();
  return a;
}

inline CMat random_hermitian(Rng& rng, int n, double scale = 1.0) {
  const CMat a = random_cmat(rng, n, n, scale);
  return 0.5 * (a + a.adjoint());
}

inline CMat random_psd(Rng& rng, int n, double scale = 1.0) {
  const CMat a = random_cmat(rng, n, n, scale);
  return a * a.adjoint() / static_cast<double>(n);
}

// A full random channel set with unit-order gains; convenient for algebraic
// identities where physical path loss is irrelevant.
inline ChannelSet random_channels(Rng& rng, int n_t, int m, int k_users,
                                  int i_users, double noise = 1.0) {
  ChannelSet ch;
  ch.f_mat = random_cmat(rng, m, n_t);
  for (int k = 0; k < k_users; ++k) {
    ch.g_d.push_back(random_cvec(rng, n_t));
    ch.g_r.push_back(random_cvec(rng, m));
  }
  for (int i = 0; i < i_users; ++i) {
    ch.l_d.push_back(random_cvec(rng, n_t));
    ch.l_r.push_back(random_cvec(rng, m));
  }
  ch.noise_power = RVec::Constant(k_users, noise);
  ch.pu_noise_power = RVec::Constant(i_users, noise);
  return ch;
}

inline PhaseConfig random_phase_config(Rng& rng, int m) {
  PhaseConfig p;
  p.psi.resize(m);
  for (int j = 0; j < m; ++j) p.psi[j] = rng.uniform(0.0, 2.0 * M_PI);
  return p;
}

inline BeamformerSet random_beams(Rng& rng, int n_t, int k_users,
                                  double scale = 1.0) {
  BeamformerSet b;
  for (int k = 0; k < k_users; ++k) b.w.push_back(random_cvec(rng, n_t, scale));
  return b;
}

// ---- naive oracles (index loops only) -------------------------------------

inline Cplx naive_inner(const CVec& a, const CVec& b) {  // a^H b
  Cplx s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// g_d + F^H Psi^H r evaluated entry by entry
inline CVec naive_effective(const CMat& f, const RVec& psi, const CVec& direct,
                            const CVec& reflected) {
  const int n_t = static_cast<int>(direct.size());
  const int m = static_cast<int>(f.rows());
  CVec out(n_t);
  for (int c = 0; c < n_t; ++c) {
    Cplx acc = direct[c];
    for (int j = 0; j < m; ++j) {
      const Cplx psi_conj = std::polar(1.0, -psi[j]);
      acc += std::conj(f(j, c)) * psi_conj * reflected[j];
    }
    out[c] = acc;
  }
  return out;
}

// SINR of user k straight from the definition
inline double naive_sinr(const std::vector<CVec>& g_eff,
                         const std::vector<CVec>& w, double noise, int k) {
  double interf = 0.0;
  for (int r = 0; r < static_cast<int>(w.size()); ++r) {
    if (r == k) continue;
    interf += std::norm(naive_inner(g_eff[k], w[r]));
  }
  return std::norm(naive_inner(g_eff[k], w[k])) / (interf + noise);
}

inline double naive_trace_re(const CMat& a, const CMat& b) {  // Re Tr(A B)
  Cplx s = 0.0;
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < static_cast<int>(a.cols()); ++j) s += a(i, j) * b(j, i);
  return s.real();
}

}  // namespace irscr::test
