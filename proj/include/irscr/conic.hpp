#pragma once

// Canonical convex subproblem shared by both SCA blocks:
//
//   minimize   c0 + sum_v Tr(C_v X_v) - sum_t c_t log(alpha_t + sum_v Tr(A_tv X_v))
//   subject to sum_v Tr(P_jv X_v) <= b_j
//              sum_v Tr(E_lv X_v)  = d_l
//              X_v Hermitian, X_v >= 0
//
// Nuclear-norm costs fold into the trace term: for X >= 0 the nuclear norm
// equals Tr(X). Logs are natural; callers supply any 1/ln2 factors.
//
// The solver behind solve() is a dense path-following barrier method. Each
// Hermitian variable is realified through the standard 2n x 2n symmetric
// embedding, so the cone kernel only ever factors real matrices. A phase-1
// pass interiorizes the supplied initial point when it sits on the boundary
// (rank-one SCA iterates always do). Problems here are small - a handful of
// matrix blocks of dimension ten or so - and the implementation leans on
// that: everything is dense, sparsity is exploited only in the Hermitian
// basis directions.

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "irscr/types.hpp"

namespace irscr::conic {

struct VarRef {
  int id = -1;
};

enum class SolveStatus { optimal, infeasible, numerical_failure };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double rel_tol = 1e-8;   // duality-gap target relative to |objective|
  double abs_tol = 1e-9;   // absolute duality-gap floor
  double mu = 20.0;        // barrier growth factor per outer stage
  int max_newton = 600;    // Newton-step budget across both phases
  int max_center = 60;     // Newton steps per centering stage
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<CMat> vars;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::infinity();  // final gap bound
  int newton_iters = 0;
  double max_violation = 0.0;  // from the independent feasibility re-check
};

struct FeasibilityReport {
  double max_eq_violation = 0.0;
  double max_ineq_violation = 0.0;    // positive means violated
  double min_psd_eigenvalue = 0.0;    // most negative eigenvalue over blocks
  double min_log_argument = std::numeric_limits<double>::infinity();

  bool feasible(double tol) const {
    return max_eq_violation <= tol && max_ineq_violation <= tol &&
           min_psd_eigenvalue >= -tol && min_log_argument > 0.0;
  }
};

class ConicProblem {
 public:
  // A fresh Hermitian PSD matrix variable of the given complex dimension.
  VarRef add_psd_var(int dim);

  int var_count() const { return static_cast<int>(dims_.size()); }
  int var_dim(VarRef v) const { return dims_.at(v.id); }

  // + Tr(C X_v); C must be Hermitian.
  void add_linear_cost(VarRef v, const CMat& c);
  // + tau ||X_v||_* , valid because X_v is constrained PSD.
  void add_nuclear_norm_cost(VarRef v, double tau);
  // - coeff * log(offset + sum_terms Tr(A X_v)); coeff > 0.
  void add_log_cost(double coeff, double offset,
                    const std::vector<std::pair<VarRef, CMat>>& terms);
  void add_constant_cost(double c0) { constant_ += c0; }

  enum class Sense { less_equal, equal };
  void add_trace_constraint(const std::vector<std::pair<VarRef, CMat>>& terms,
                            Sense sense, double rhs);
  // X_v[i][i] = value for every i.
  void pin_diagonal(VarRef v, double value);

  // Optional strictly-or-weakly feasible starting guess; boundary points are
  // fine, phase-1 pushes them inside.
  void set_initial_point(VarRef v, const CMat& x0);

  ConicSolution solve(const SolverOptions& opts = {}) const;

  // Objective and constraint checks evaluated from scratch on a candidate
  // point; used by tests and by solve()'s own exit certification. Never
  // consults solver state.
  double objective_at(const std::vector<CMat>& x) const;
  FeasibilityReport check_point(const std::vector<CMat>& x) const;

  // Self-describing text dump for offline debugging.
  void dump(std::ostream& os) const;

 private:
  struct LogTerm {
    double coeff;
    double offset;
    std::vector<std::pair<int, CMat>> terms;
  };
  struct Constraint {
    std::vector<std::pair<int, CMat>> terms;
    Sense sense;
    double rhs;
  };

  void check_var(VarRef v) const;
  static CMat require_hermitian(const CMat& a, const char* what);

  std::vector<int> dims_;
  std::vector<CMat> linear_costs_;  // one Hermitian C per var (zero allowed)
  std::vector<LogTerm> log_costs_;
  std::vector<Constraint> constraints_;
  std::vector<std::optional<CMat>> initial_;
  double constant_ = 0.0;

  friend class BarrierSolver;
};

}  // namespace irscr::conic
