#include "irscr/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace irscr::conic {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Problem assembly (complex Hermitian surface)
// ---------------------------------------------------------------------------

void ConicProblem::check_var(VarRef v) const {
  if (v.id < 0 || v.id >= static_cast<int>(dims_.size()))
    throw Error("conic: variable reference out of range");
}

CMat ConicProblem::require_hermitian(const CMat& a, const char* what) {
  if (a.rows() != a.cols())
    throw DimensionError(std::string("conic: ") + what + " must be square");
  const double dev = (a - a.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (dev > 1e-10 * scale)
    throw Error(std::string("conic: ") + what + " is not Hermitian (dev " +
                std::to_string(dev) + ")");
  return 0.5 * (a + a.adjoint());
}

VarRef ConicProblem::add_psd_var(int dim) {
  if (dim < 1) throw DimensionError("conic: PSD variable dimension must be >= 1");
  dims_.push_back(dim);
  linear_costs_.push_back(CMat::Zero(dim, dim));
  initial_.push_back(std::nullopt);
  return VarRef{static_cast<int>(dims_.size()) - 1};
}

void ConicProblem::add_linear_cost(VarRef v, const CMat& c) {
  check_var(v);
  const CMat h = require_hermitian(c, "linear cost");
  if (h.rows() != dims_[v.id])
    throw DimensionError("conic: linear cost dimension mismatch");
  linear_costs_[v.id] += h;
}

void ConicProblem::add_nuclear_norm_cost(VarRef v, double tau) {
  check_var(v);
  // ||X||_* = Tr(X) on the PSD cone
  linear_costs_[v.id] += tau * CMat::Identity(dims_[v.id], dims_[v.id]);
}

void ConicProblem::add_log_cost(double coeff, double offset,
                                const std::vector<std::pair<VarRef, CMat>>& terms) {
  if (!(coeff > 0.0)) throw Error("conic: log cost coefficient must be > 0");
  LogTerm lt;
  lt.coeff = coeff;
  lt.offset = offset;
  for (const auto& [v, a] : terms) {
    check_var(v);
    const CMat h = require_hermitian(a, "log cost term");
    if (h.rows() != dims_[v.id])
      throw DimensionError("conic: log cost term dimension mismatch");
    if (h.cwiseAbs().maxCoeff() == 0.0) continue;
    lt.terms.emplace_back(v.id, h);
  }
  if (lt.terms.empty()) {
    if (!(offset > 0.0))
      throw Error("conic: constant log argument must be positive");
    constant_ -= coeff * std::log(offset);
    return;
  }
  log_costs_.push_back(std::move(lt));
}

void ConicProblem::add_trace_constraint(
    const std::vector<std::pair<VarRef, CMat>>& terms, Sense sense, double rhs) {
  Constraint c;
  c.sense = sense;
  c.rhs = rhs;
  for (const auto& [v, a] : terms) {
    check_var(v);
    const CMat h = require_hermitian(a, "constraint term");
    if (h.rows() != dims_[v.id])
      throw DimensionError("conic: constraint term dimension mismatch");
    c.terms.emplace_back(v.id, h);
  }
  constraints_.push_back(std::move(c));
}

void ConicProblem::pin_diagonal(VarRef v, double value) {
  check_var(v);
  const int n = dims_[v.id];
  for (int i = 0; i < n; ++i) {
    CMat e = CMat::Zero(n, n);
    e(i, i) = 1.0;
    add_trace_constraint({{v, e}}, Sense::equal, value);
  }
}

void ConicProblem::set_initial_point(VarRef v, const CMat& x0) {
  check_var(v);
  const CMat h = require_hermitian(x0, "initial point");
  if (h.rows() != dims_[v.id])
    throw DimensionError("conic: initial point dimension mismatch");
  initial_[v.id] = h;
}

double ConicProblem::objective_at(const std::vector<CMat>& x) const {
  if (static_cast<int>(x.size()) != var_count())
    throw DimensionError("conic: objective_at variable count mismatch");
  double f = constant_;
  for (int v = 0; v < var_count(); ++v)
    f += std::real((linear_costs_[v] * x[v]).trace());
  for (const auto& lt : log_costs_) {
    double a = lt.offset;
    for (const auto& [v, mat] : lt.terms) a += std::real((mat * x[v]).trace());
    if (!(a > 0.0)) throw Error("conic: nonpositive log argument");
    f -= lt.coeff * std::log(a);
  }
  return f;
}

FeasibilityReport ConicProblem::check_point(const std::vector<CMat>& x) const {
  if (static_cast<int>(x.size()) != var_count())
    throw DimensionError("conic: check_point variable count mismatch");
  FeasibilityReport rep;
  for (int v = 0; v < var_count(); ++v) {
    Eigen::SelfAdjointEigenSolver<CMat> es(x[v], Eigen::EigenvaluesOnly);
    rep.min_psd_eigenvalue =
        std::min(rep.min_psd_eigenvalue, es.eigenvalues().minCoeff());
  }
  for (const auto& c : constraints_) {
    double lhs = 0.0;
    for (const auto& [v, mat] : c.terms) lhs += std::real((mat * x[v]).trace());
    if (c.sense == Sense::equal)
      rep.max_eq_violation = std::max(rep.max_eq_violation, std::abs(lhs - c.rhs));
    else
      rep.max_ineq_violation = std::max(rep.max_ineq_violation, lhs - c.rhs);
  }
  for (const auto& lt : log_costs_) {
    double a = lt.offset;
    for (const auto& [v, mat] : lt.terms) a += std::real((mat * x[v]).trace());
    rep.min_log_argument = std::min(rep.min_log_argument, a);
  }
  return rep;
}

void ConicProblem::dump(std::ostream& os) const {
  os << "conic problem: " << var_count() << " PSD vars, " << log_costs_.size()
     << " log terms, " << constraints_.size() << " trace constraints\n";
  for (int v = 0; v < var_count(); ++v) {
    os << "var " << v << ": hermitian " << dims_[v] << "x" << dims_[v] << "\n";
    os << "  linear cost:\n" << linear_costs_[v] << "\n";
  }
  os << "constant cost: " << constant_ << "\n";
  for (const auto& lt : log_costs_) {
    os << "log term: -" << lt.coeff << " * log(" << lt.offset;
    for (const auto& [v, mat] : lt.terms)
      os << " + Tr(A var" << v << ")  with A =\n" << mat << "\n";
    os << ")\n";
  }
  for (const auto& c : constraints_) {
    os << "constraint (" << (c.sense == Sense::equal ? "==" : "<=") << " " << c.rhs
       << "):\n";
    for (const auto& [v, mat] : c.terms)
      os << "  Tr(A var" << v << ") with A =\n" << mat << "\n";
  }
}

// ---------------------------------------------------------------------------
// Realified barrier solver
// ---------------------------------------------------------------------------
//
// Coordinates: each Hermitian variable of complex dimension n contributes n^2
// real coordinates against the orthonormal basis
//   D_p  = e_pp,
//   S_pq = (e_pq + e_qp)/sqrt(2),
//   A_pq = (i e_pq - i e_qp)/sqrt(2),   p < q,
// under <A,B> = Tr(AB). The PSD cone is handled through the symmetric
// embedding  X -> [[Re X, -Im X], [Im X, Re X]];  basis directions embed into
// matrices with at most four nonzeros, which keeps barrier Hessian assembly
// at O(coords^2) scalar work.

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SparseEntry {
  int r, c;
  double v;
};

struct BlockTerm {
  int coord;
  std::vector<SparseEntry> entries;  // full (mirrored) entry list
};

struct PsdBlock {
  int dim2;  // embedded (real) dimension = 2n
  std::vector<BlockTerm> terms;
};

// value = offset + vec . x
struct AffineForm {
  VectorXd vec;
  double offset = 0.0;
  double value(const VectorXd& x) const { return offset + vec.dot(x); }
};

struct RealProblem {
  int n_coords = 0;
  std::vector<PsdBlock> blocks;
  AffineForm lin_obj;
  std::vector<AffineForm> log_args;  // objective gets -log_coeffs[t]*log(arg)
  std::vector<double> log_coeffs;
  std::vector<AffineForm> slacks;  // inequality slack forms, must stay > 0
  MatrixXd a_eq;                   // may have 0 rows
  VectorXd d_eq;
  double nu = 0.0;  // barrier complexity for the gap bound

  double objective(const VectorXd& x) const {
    double f = lin_obj.value(x);
    for (std::size_t t = 0; t < log_args.size(); ++t)
      f -= log_coeffs[t] * std::log(log_args[t].value(x));
    return f;
  }
};

// accumulates, so repeated terms on one variable add up
void coords_from_hermitian(const CMat& a, VectorXd& out, int offset) {
  const int n = static_cast<int>(a.rows());
  int idx = offset;
  for (int p = 0; p < n; ++p) out[idx++] += a(p, p).real();
  const double s2 = std::sqrt(2.0);
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) {
      out[idx++] += s2 * a(p, q).real();
      out[idx++] += s2 * a(p, q).imag();
    }
}

CMat hermitian_from_coords(const VectorXd& x, int offset, int n) {
  CMat a(n, n);
  int idx = offset;
  for (int p = 0; p < n; ++p) a(p, p) = x[idx++];
  const double inv_s2 = 1.0 / std::sqrt(2.0);
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) {
      const double re = x[idx++] * inv_s2;
      const double im = x[idx++] * inv_s2;
      a(p, q) = Cplx(re, im);
      a(q, p) = Cplx(re, -im);
    }
  return a;
}

// Embedded sparse entries of the basis direction with the given local index.
std::vector<SparseEntry> embedded_basis_entries(int n, int local) {
  const double s = 1.0 / std::sqrt(2.0);
  if (local < n) {
    const int p = local;
    return {{p, p, 1.0}, {n + p, n + p, 1.0}};
  }
  int idx = local - n;
  // recover (p, q, re/im) from the packed off-diagonal ordering
  int p = 0;
  int per_row = 2 * (n - 1);
  while (idx >= per_row) {
    idx -= per_row;
    ++p;
    per_row = 2 * (n - 1 - p);
  }
  const int q = p + 1 + idx / 2;
  const bool real_part = (idx % 2) == 0;
  if (real_part) {
    // [[M,0],[0,M]] with M = (e_pq + e_qp)/sqrt(2)
    return {{p, q, s}, {q, p, s}, {n + p, n + q, s}, {n + q, n + p, s}};
  }
  // [[0,-M],[M,0]] with M = (e_pq - e_qp)/sqrt(2)
  return {{p, n + q, -s}, {q, n + p, s}, {n + p, q, s}, {n + q, p, -s}};
}

void build_embedded(const PsdBlock& b, const VectorXd& x, MatrixXd& out) {
  out.setZero(b.dim2, b.dim2);
  for (const auto& term : b.terms) {
    const double xv = x[term.coord];
    if (xv == 0.0) continue;
    for (const auto& e : term.entries) out(e.r, e.c) += xv * e.v;
  }
}

struct BarrierState {
  VectorXd x;
  double t = 1.0;
  int newton_iters = 0;
  bool stalled = false;
};

class BarrierCore {
 public:
  BarrierCore(const RealProblem& p, const SolverOptions& opts)
      : p_(p), opts_(opts) {}

  // merit = t * f(x) + Phi(x); +inf when x is not strictly feasible
  double merit(const VectorXd& x, double t) const {
    double val = t * p_.lin_obj.value(x);
    for (std::size_t i = 0; i < p_.log_args.size(); ++i) {
      const double a = p_.log_args[i].value(x);
      if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
      val -= (t * p_.log_coeffs[i] + 1.0) * std::log(a);
    }
    for (const auto& sform : p_.slacks) {
      const double sl = sform.value(x);
      if (!(sl > 0.0)) return std::numeric_limits<double>::infinity();
      val -= std::log(sl);
    }
    MatrixXd xhat;
    for (const auto& b : p_.blocks) {
      build_embedded(b, x, xhat);
      Eigen::LLT<MatrixXd> llt(xhat);
      if (llt.info() != Eigen::Success)
        return std::numeric_limits<double>::infinity();
      double logdet = 0.0;
      for (int i = 0; i < b.dim2; ++i)
        logdet += std::log(llt.matrixL()(i, i));
      val -= 2.0 * logdet;
    }
    return val;
  }

  // Interior with a genuine margin, relative to each constraint's own scale.
  // An LLT-success test is not enough here: a rank-one start factors with
  // tiny positive pivots and would send phase-2 Newton into the wall.
  bool strictly_feasible(const VectorXd& x) const {
    for (std::size_t i = 0; i < p_.log_args.size(); ++i) {
      const double a = p_.log_args[i].value(x);
      if (!(a > 1e-12 * (1.0 + std::abs(p_.log_args[i].offset)))) return false;
    }
    for (const auto& sform : p_.slacks) {
      const double sl = sform.value(x);
      if (!(sl > 1e-12 * (1.0 + std::abs(sform.offset)))) return false;
    }
    MatrixXd xhat;
    for (const auto& b : p_.blocks) {
      build_embedded(b, x, xhat);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(xhat, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (!(hi > 0.0) || !(lo > 1e-9 * hi)) return false;
    }
    return true;
  }

  // One damped Newton step at barrier parameter t. Returns the decrement
  // lambda^2; a negative return flags a factorization failure. moved reports
  // whether the line search accepted any step.
  double newton_step(VectorXd& x, double t, bool& moved) {
    const int n = p_.n_coords;
    VectorXd grad = t * p_.lin_obj.vec;
    MatrixXd hess = MatrixXd::Zero(n, n);

    for (std::size_t i = 0; i < p_.log_args.size(); ++i) {
      const double a = p_.log_args[i].value(x);
      const double w = t * p_.log_coeffs[i] + 1.0;
      grad.noalias() -= (w / a) * p_.log_args[i].vec;
      hess.noalias() += (w / (a * a)) * p_.log_args[i].vec *
                        p_.log_args[i].vec.transpose();
    }
    for (const auto& sform : p_.slacks) {
      const double sl = sform.value(x);
      grad.noalias() -= sform.vec / sl;
      hess.noalias() += sform.vec * sform.vec.transpose() / (sl * sl);
    }

    MatrixXd xhat, finv;
    for (const auto& b : p_.blocks) {
      build_embedded(b, x, xhat);
      Eigen::LLT<MatrixXd> llt(xhat);
      if (llt.info() != Eigen::Success) return -1.0;
      finv = llt.solve(MatrixXd::Identity(b.dim2, b.dim2));
      for (const auto& term : b.terms) {
        double g = 0.0;
        for (const auto& e : term.entries) g += e.v * finv(e.r, e.c);
        grad[term.coord] -= g;
      }
      const int nt = static_cast<int>(b.terms.size());
      for (int i = 0; i < nt; ++i) {
        const auto& ti = b.terms[i];
        for (int l = i; l < nt; ++l) {
          const auto& tl = b.terms[l];
          double h = 0.0;
          for (const auto& ei : ti.entries)
            for (const auto& el : tl.entries)
              h += ei.v * el.v * finv(ei.c, el.r) * finv(el.c, ei.r);
          hess(ti.coord, tl.coord) += h;
          if (l != i) hess(tl.coord, ti.coord) += h;
        }
      }
    }

    // Equality-constrained Newton via the Schur complement. The equality
    // residual is absorbed so tiny drift cannot accumulate.
    VectorXd dx;
    const double jitter0 = 1e-12 * std::max(1.0, hess.trace() / n);
    double jitter = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      MatrixXd h = hess;
      if (jitter > 0.0) h.diagonal().array() += jitter;
      Eigen::LLT<MatrixXd> hllt(h);
      if (hllt.info() != Eigen::Success) {
        jitter = (jitter == 0.0) ? jitter0 : jitter * 100.0;
        continue;
      }
      if (p_.a_eq.rows() == 0) {
        dx = -hllt.solve(grad);
        // one round of iterative refinement buys accuracy back at large t
        dx -= hllt.solve(grad + h * dx);
      } else {
        const VectorXd r = p_.d_eq - p_.a_eq * x;
        const MatrixXd hinv_at = hllt.solve(p_.a_eq.transpose());
        const MatrixXd schur = p_.a_eq * hinv_at;
        Eigen::LDLT<MatrixXd> sldlt(schur);
        if (sldlt.info() != Eigen::Success) {
          jitter = (jitter == 0.0) ? jitter0 : jitter * 100.0;
          continue;
        }
        VectorXd w = sldlt.solve(-p_.a_eq * hllt.solve(grad) - r);
        dx = -hllt.solve(grad + p_.a_eq.transpose() * w);
        // refine the KKT solution against both residuals
        const VectorXd rg = grad + h * dx + p_.a_eq.transpose() * w;
        const VectorXd re = p_.a_eq * dx - r;
        const VectorXd dw = sldlt.solve(re - p_.a_eq * hllt.solve(rg));
        dx -= hllt.solve(rg + p_.a_eq.transpose() * dw);
        w += dw;
      }
      break;
    }
    if (dx.size() == 0) return -1.0;

    const double lambda2 = std::max(0.0, -grad.dot(dx));

    // longest step keeping every affine slack / log argument positive
    double alpha = 1.0;
    auto cap_by_form = [&](const AffineForm& f) {
      const double val = f.value(x);
      const double rate = f.vec.dot(dx);
      if (rate < 0.0) alpha = std::min(alpha, -0.99 * val / rate);
    };
    for (const auto& f : p_.log_args) cap_by_form(f);
    for (const auto& f : p_.slacks) cap_by_form(f);

    const double m0 = merit(x, t);
    const double slope = grad.dot(dx);
    for (int ls = 0; ls < 60; ++ls) {
      const VectorXd cand = x + alpha * dx;
      const double mc = merit(cand, t);
      if (mc <= m0 + 0.01 * alpha * slope) {
        x = cand;
        moved = true;
        return lambda2;
      }
      alpha *= 0.5;
    }
    moved = false;
    return lambda2;
  }

  // Center at fixed t. Returns the final decrement (lambda^2 / 2); the gap
  // bound nu/t may only be trusted when this is small.
  double center(BarrierState& st) {
    double half_l2 = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts_.max_center; ++it) {
      if (st.newton_iters >= opts_.max_newton) {
        st.stalled = true;
        return half_l2;
      }
      bool moved = false;
      const double lambda2 = newton_step(st.x, st.t, moved);
      ++st.newton_iters;
      if (lambda2 < 0.0) {
        st.stalled = true;
        return std::numeric_limits<double>::infinity();
      }
      half_l2 = lambda2 / 2.0;
      if (half_l2 <= kCenterTol) return half_l2;
      if (!moved) {
        // line search exhausted; numerically centered or genuinely stuck
        if (half_l2 > kTrustTol) st.stalled = true;
        return half_l2;
      }
    }
    return half_l2;
  }

  // A stage counts as centered once the decrement is below kTrustTol
  // (lambda ~ 0.1, inside the quadratic region); the residual suboptimality
  // this leaves is O(lambda) * nu / t, immaterial at the t where it applies.
  static constexpr double kCenterTol = 1e-10;
  static constexpr double kTrustTol = 5e-3;

  const RealProblem& p_;
  const SolverOptions& opts_;
};

// Minimum-norm correction onto the equality manifold. Returns false when the
// equalities are inconsistent.
bool project_onto_equalities(const RealProblem& p, VectorXd& x) {
  if (p.a_eq.rows() == 0) return true;
  const VectorXd r = p.d_eq - p.a_eq * x;
  const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(p.a_eq);
  x += cod.solve(r);
  const double resid = (p.d_eq - p.a_eq * x).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, p.d_eq.cwiseAbs().maxCoeff());
  return resid <= 1e-8 * scale;
}

struct PathResult {
  bool converged = false;
  bool stalled = false;
  double gap = std::numeric_limits<double>::infinity();
  int newton_iters = 0;
};

// Follow the central path until nu/t reaches the target gap (a function of
// the current objective) or early_stop fires.
template <typename TargetFn, typename EarlyStopFn>
PathResult follow_path(const RealProblem& p, const SolverOptions& opts,
                       VectorXd& x, TargetFn target_gap, EarlyStopFn early_stop) {
  BarrierCore core(p, opts);
  BarrierState st;
  st.x = x;
  const double f0 = std::abs(p.objective(st.x));
  st.t = std::max(1e-6, p.nu / std::max(1.0, 10.0 * f0));

  static const bool debug = std::getenv("IRSCR_CONIC_DEBUG") != nullptr;
  PathResult res;
  for (int stage = 0; stage < 64; ++stage) {
    const double half_l2 = core.center(st);
    res.newton_iters = st.newton_iters;
    res.gap = p.nu / st.t;
    x = st.x;
    if (debug)
      std::cerr << "[conic] stage " << stage << " t=" << st.t
                << " half_l2=" << half_l2 << " gap=" << res.gap
                << " f=" << p.objective(st.x) << " newtons=" << st.newton_iters
                << (st.stalled ? " STALLED" : "") << "\n";
    const bool centered = half_l2 <= BarrierCore::kTrustTol;
    if (centered && early_stop(st.x, res.gap)) {
      res.converged = true;
      return res;
    }
    if (centered && res.gap <= target_gap(st.x)) {
      res.converged = true;
      return res;
    }
    if (st.stalled || st.newton_iters >= opts.max_newton) {
      // a stall within sight of the target is still a usable answer: the
      // point is strictly feasible and the bound only overshoots by the slop
      res.converged = res.gap <= 4.0 * target_gap(st.x);
      res.stalled = !res.converged;
      return res;
    }
    if (centered) {
      // grow t, but never far beyond what the current target needs; extreme
      // t only buys ill-conditioning
      const double tgt = target_gap(st.x);
      double t_next = st.t * opts.mu;
      if (tgt > 0.0)
        t_next = std::min(t_next, std::max(st.t * 1.2, 1.05 * p.nu / tgt));
      st.t = t_next;
    }
  }
  res.stalled = true;
  return res;
}

}  // namespace

ConicSolution ConicProblem::solve(const SolverOptions& opts) const {
  if (var_count() == 0) throw Error("conic: no variables");

  // --- build the realified canonical problem -------------------------------
  RealProblem rp;
  std::vector<int> offsets(var_count());
  int n_coords = 0;
  for (int v = 0; v < var_count(); ++v) {
    offsets[v] = n_coords;
    n_coords += dims_[v] * dims_[v];
  }
  rp.n_coords = n_coords;

  rp.blocks.reserve(var_count());
  for (int v = 0; v < var_count(); ++v) {
    PsdBlock b;
    const int n = dims_[v];
    b.dim2 = 2 * n;
    b.terms.reserve(n * n);
    for (int local = 0; local < n * n; ++local)
      b.terms.push_back({offsets[v] + local, embedded_basis_entries(n, local)});
    rp.blocks.push_back(std::move(b));
    rp.nu += 2.0 * n;
  }

  auto form_from_terms = [&](const std::vector<std::pair<int, CMat>>& terms,
                             double offset) {
    AffineForm f;
    f.vec = VectorXd::Zero(n_coords);
    f.offset = offset;
    for (const auto& [v, mat] : terms)
      coords_from_hermitian(mat, f.vec, offsets[v]);
    return f;
  };

  rp.lin_obj.vec = VectorXd::Zero(n_coords);
  rp.lin_obj.offset = constant_;
  for (int v = 0; v < var_count(); ++v)
    coords_from_hermitian(linear_costs_[v], rp.lin_obj.vec, offsets[v]);

  for (const auto& lt : log_costs_) {
    AffineForm f;
    f.vec = VectorXd::Zero(n_coords);
    f.offset = lt.offset;
    for (const auto& [v, mat] : lt.terms)
      coords_from_hermitian(mat, f.vec, offsets[v]);
    rp.log_args.push_back(std::move(f));
    rp.log_coeffs.push_back(lt.coeff);
    rp.nu += 1.0;
  }

  int n_eq = 0;
  for (const auto& c : constraints_)
    if (c.sense == Sense::equal) ++n_eq;
  rp.a_eq.resize(n_eq, n_coords);
  rp.d_eq.resize(n_eq);
  int eq_row = 0;
  for (const auto& c : constraints_) {
    if (c.sense == Sense::equal) {
      AffineForm f = form_from_terms(c.terms, 0.0);
      rp.a_eq.row(eq_row) = f.vec.transpose();
      rp.d_eq[eq_row] = c.rhs;
      ++eq_row;
    } else {
      // slack form b - <terms, x> > 0
      AffineForm f = form_from_terms(c.terms, 0.0);
      f.vec = -f.vec;
      f.offset = c.rhs;
      rp.slacks.push_back(std::move(f));
      rp.nu += 1.0;
    }
  }

  // --- initial point --------------------------------------------------------
  VectorXd x0 = VectorXd::Zero(n_coords);
  for (int v = 0; v < var_count(); ++v) {
    const CMat init = initial_[v].value_or(CMat::Identity(dims_[v], dims_[v]));
    coords_from_hermitian(init, x0, offsets[v]);
  }

  ConicSolution sol;
  if (!project_onto_equalities(rp, x0)) {
    sol.status = SolveStatus::infeasible;
    return sol;
  }

  BarrierCore probe(rp, opts);
  VectorXd x_start = x0;
  bool have_interior = probe.strictly_feasible(x_start);
  if (!have_interior) {
    // cheap rescue before paying for phase-1: blend toward the identity
    // (right for unit-diagonal feasible sets) or toward a shrunken identity
    // (right when resource constraints leave little headroom at the hint)
    VectorXd x_id = VectorXd::Zero(n_coords);
    VectorXd x_small = VectorXd::Zero(n_coords);
    for (int v = 0; v < var_count(); ++v) {
      coords_from_hermitian(CMat::Identity(dims_[v], dims_[v]), x_id, offsets[v]);
      coords_from_hermitian(
          (0.3 / dims_[v]) * CMat::Identity(dims_[v], dims_[v]), x_small,
          offsets[v]);
    }
    // shrinking the hint first opens up any inequality that is active there
    for (double shrink : {1.0, 0.9, 0.6}) {
      for (const VectorXd* target : {&x_small, &x_id}) {
        for (double gamma : {1e-3, 3e-2, 0.3}) {
          VectorXd cand = (1.0 - gamma) * (shrink * x0) + gamma * (*target);
          if (project_onto_equalities(rp, cand) &&
              probe.strictly_feasible(cand)) {
            x_start = cand;
            have_interior = true;
            break;
          }
        }
        if (have_interior) break;
      }
      if (have_interior) break;
    }
  }

  int phase1_newtons = 0;
  if (!have_interior) {
    // phase-1: minimize s with every constraint relaxed by s
    RealProblem p1;
    const int sn = n_coords;  // index of the relaxation coordinate
    p1.n_coords = n_coords + 1;
    p1.blocks = rp.blocks;
    for (std::size_t bi = 0; bi < p1.blocks.size(); ++bi) {
      BlockTerm st;
      st.coord = sn;
      for (int i = 0; i < p1.blocks[bi].dim2; ++i)
        st.entries.push_back({i, i, 1.0});
      p1.blocks[bi].terms.push_back(std::move(st));
      p1.nu += p1.blocks[bi].dim2;
    }
    auto widen = [&](const AffineForm& f) {
      AffineForm g;
      g.vec = VectorXd::Zero(n_coords + 1);
      g.vec.head(n_coords) = f.vec;
      g.vec[sn] = 1.0;  // slack' = slack + s
      g.offset = f.offset;
      return g;
    };
    for (const auto& f : rp.slacks) p1.slacks.push_back(widen(f));
    for (const auto& f : rp.log_args) p1.slacks.push_back(widen(f));
    p1.nu += static_cast<double>(p1.slacks.size());
    p1.lin_obj.vec = VectorXd::Zero(n_coords + 1);
    p1.lin_obj.vec[sn] = 1.0;
    p1.a_eq.resize(rp.a_eq.rows(), n_coords + 1);
    p1.a_eq.leftCols(n_coords) = rp.a_eq;
    p1.a_eq.col(sn).setZero();
    p1.d_eq = rp.d_eq;

    // starting s: clear every violation with a margin
    double s0 = 0.0;
    MatrixXd xhat;
    for (const auto& b : rp.blocks) {
      build_embedded(b, x0, xhat);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(xhat, Eigen::EigenvaluesOnly);
      s0 = std::max(s0, -es.eigenvalues().minCoeff());
    }
    for (const auto& f : rp.slacks) s0 = std::max(s0, -f.value(x0));
    for (const auto& f : rp.log_args) s0 = std::max(s0, -f.value(x0));
    s0 += 1.0;

    VectorXd x1(n_coords + 1);
    x1.head(n_coords) = x0;
    x1[sn] = s0;

    int extra_stages = 0;
    auto early = [&](const VectorXd& xc, double gapc) {
      if (xc[sn] - gapc > 0.0) return true;  // certified: no interior point
      if (xc[sn] < -1e-9 * std::max(1.0, s0)) {
        // one bonus stage after turning negative buys a healthier margin
        return ++extra_stages >= 2;
      }
      return false;
    };
    auto target = [&](const VectorXd&) { return 0.25 * opts.abs_tol; };
    PathResult pr = follow_path(p1, opts, x1, target, early);
    phase1_newtons = pr.newton_iters;
    if (x1[sn] >= -1e-12 * std::max(1.0, s0)) {
      sol.status = pr.stalled ? SolveStatus::numerical_failure
                              : SolveStatus::infeasible;
      sol.newton_iters = phase1_newtons;
      return sol;
    }
    x_start = x1.head(n_coords);
    if (!probe.strictly_feasible(x_start)) {
      sol.status = SolveStatus::numerical_failure;
      sol.newton_iters = phase1_newtons;
      return sol;
    }
  }

  // --- phase-2 --------------------------------------------------------------
  auto target = [&](const VectorXd& xc) {
    return std::max(opts.abs_tol, opts.rel_tol * std::abs(rp.objective(xc)));
  };
  auto never = [](const VectorXd&, double) { return false; };
  VectorXd x = x_start;
  PathResult pr = follow_path(rp, opts, x, target, never);

  sol.newton_iters = phase1_newtons + pr.newton_iters;
  sol.gap = pr.gap;
  sol.vars.resize(var_count());
  for (int v = 0; v < var_count(); ++v)
    sol.vars[v] = hermitian_from_coords(x, offsets[v], dims_[v]);
  sol.objective = objective_at(sol.vars);

  const FeasibilityReport rep = check_point(sol.vars);
  double scale = 1.0;
  for (int v = 0; v < var_count(); ++v)
    scale = std::max(scale, sol.vars[v].cwiseAbs().maxCoeff());
  sol.max_violation = std::max({rep.max_eq_violation, rep.max_ineq_violation,
                                -rep.min_psd_eigenvalue});
  const bool certified = rep.feasible(1e-6 * scale);

  sol.status = (pr.converged && certified) ? SolveStatus::optimal
                                           : SolveStatus::numerical_failure;
  return sol;
}

}  // namespace irscr::conic
