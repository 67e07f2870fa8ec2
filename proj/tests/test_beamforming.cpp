#include <doctest.h>

#include <cmath>

#include "irscr/beamforming.hpp"
#include "irscr/system_model.hpp"
#include "test_util.hpp"

using namespace irscr;
using namespace irscr::test;

namespace {

FixedPhaseProblem random_problem(Rng& rng, int n_t, int k_users, int i_users,
                                 double p_max = 1.0, double p_tol = 1.0) {
  FixedPhaseProblem prob;
  for (int k = 0; k < k_users; ++k) prob.g_eff.push_back(random_cvec(rng, n_t));
  for (int i = 0; i < i_users; ++i) prob.l_eff.push_back(random_cvec(rng, n_t));
  prob.noise = RVec::Constant(k_users, 1.0);
  prob.budgets.p_max = p_max;
  prob.budgets.p_tol = RVec::Constant(i_users, p_tol);
  return prob;
}

LiftedBeamSet random_lifted(Rng& rng, int n_t, int k_users, double scale = 0.5) {
  LiftedBeamSet l;
  for (int k = 0; k < k_users; ++k) l.w_mat.push_back(random_psd(rng, n_t, scale));
  return l;
}

LiftedBeamSet zero_lifted(int n_t, int k_users) {
  LiftedBeamSet l;
  l.w_mat.assign(k_users, CMat::Zero(n_t, n_t));
  return l;
}

// numerical derivative of g along a Hermitian direction
double directional_derivative_g(const LiftedBeamSet& at,
                                const FixedPhaseProblem& prob, int k,
                                const CMat& dir, double h) {
  LiftedBeamSet plus = at, minus = at;
  plus.w_mat[k] += h * dir;
  minus.w_mat[k] -= h * dir;
  return (g_value(plus, prob) - g_value(minus, prob)) / (2.0 * h);
}

}  // namespace

TEST_CASE("f and g vanish at zero beams with unit noise") {
  Rng rng(1);
  const FixedPhaseProblem prob = random_problem(rng, 3, 2, 1);
  const LiftedBeamSet zero = zero_lifted(3, 2);
  CHECK(f_value(zero, prob) == 0.0);  // log2(1) terms only
  CHECK(g_value(zero, prob) == 0.0);
}

TEST_CASE("single-user g has no interference terms") {
  Rng rng(2);
  FixedPhaseProblem prob = random_problem(rng, 3, 1, 0);
  prob.noise[0] = 0.37;
  const LiftedBeamSet lifted = random_lifted(rng, 3, 1);
  CHECK(g_value(lifted, prob) == doctest::Approx(-std::log2(0.37)));
  // and the gradient is exactly zero
  CHECK(grad_g(lifted, prob, 0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("g - f equals the trace-form sum rate") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const FixedPhaseProblem prob = random_problem(rng, 3, 2, 0);
    const BeamformerSet beams = random_beams(rng, 3, 2, 0.7);
    const LiftedBeamSet lifted = lift_beams(beams);
    double want = 0.0;
    for (int k = 0; k < 2; ++k)
      want +=
          std::log2(1.0 + sinr_trace_w(lifted, prob.g_eff, prob.noise, k));
    CHECK(g_value(lifted, prob) - f_value(lifted, prob) ==
          doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("grad_g matches central finite differences") {
  Rng rng(4);
  const int n_t = 3;
  for (int trial = 0; trial < 5; ++trial) {
    const FixedPhaseProblem prob = random_problem(rng, n_t, 2, 0);
    const LiftedBeamSet at = random_lifted(rng, n_t, 2);
    for (int k = 0; k < 2; ++k) {
      const CMat grad = grad_g(at, prob, k);
      const double scale = std::max(1e-12, grad.cwiseAbs().maxCoeff());
      // real-diagonal directions plus real/imaginary off-diagonal pairs
      for (int p = 0; p < n_t; ++p)
        for (int q = p; q < n_t; ++q) {
          CMat dir = CMat::Zero(n_t, n_t);
          if (p == q) {
            dir(p, p) = 1.0;
            const double fd = directional_derivative_g(at, prob, k, dir, 1e-6);
            CHECK(std::abs(fd - grad(p, p).real()) / scale < 1e-5);
          } else {
            dir(p, q) = dir(q, p) = 1.0;
            double fd = directional_derivative_g(at, prob, k, dir, 1e-6);
            // d/ds Tr(D (X + s dir)) = 2 Re D_pq for this direction
            CHECK(std::abs(fd - 2.0 * grad(p, q).real()) / scale < 1e-5);
            // d/ds Tr(D (X + s dir)) = 2 Im D_pq for dir = i e_pq - i e_qp
            dir(p, q) = Cplx(0.0, 1.0);
            dir(q, p) = Cplx(0.0, -1.0);
            fd = directional_derivative_g(at, prob, k, dir, 1e-6);
            CHECK(std::abs(fd - 2.0 * grad(p, q).imag()) / scale < 1e-5);
          }
        }
    }
  }
}

TEST_CASE("doubling the noise shrinks the gradient") {
  Rng rng(5);
  FixedPhaseProblem prob = random_problem(rng, 3, 2, 0);
  const LiftedBeamSet at = random_lifted(rng, 3, 2);
  const double before = grad_g(at, prob, 0).norm();
  prob.noise *= 2.0;
  const double after = grad_g(at, prob, 0).norm();
  CHECK(after < before);
}

TEST_CASE("underestimator: tangency, domination and K=1 constancy") {
  Rng rng(6);
  const FixedPhaseProblem prob = random_problem(rng, 3, 2, 0);
  const LiftedBeamSet at = random_lifted(rng, 3, 2);
  // tangent at the expansion point, exactly
  CHECK(underestimate_g(at, at, prob) == g_value(at, prob));
  // global domination on random query points
  for (int trial = 0; trial < 100; ++trial) {
    const LiftedBeamSet query = random_lifted(rng, 3, 2);
    CHECK(underestimate_g(at, query, prob) <= g_value(query, prob) + 1e-9);
  }
  // single user: g^ is constant in the query
  const FixedPhaseProblem single = [&] {
    Rng r2(7);
    return random_problem(r2, 3, 1, 0);
  }();
  const LiftedBeamSet a1 = random_lifted(rng, 3, 1);
  const LiftedBeamSet q1 = random_lifted(rng, 3, 1);
  CHECK(underestimate_g(a1, q1, single) ==
        doctest::Approx(g_value(a1, single)).epsilon(1e-12));
}

TEST_CASE("vanishing power budget forces near-zero beams") {
  Rng rng(8);
  FixedPhaseProblem prob = random_problem(rng, 3, 2, 0, /*p_max=*/1e-9);
  BeamSubproblemState state;
  state.w_mat = zero_lifted(3, 2);
  const BeamSubproblemState next = solve_beam_iteration(state, prob);
  for (const auto& w : next.w_mat.w_mat) CHECK(w.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(next.rate_history.back() < 1e-6);
}

TEST_CASE("single-user SCA attains the MRT closed form") {
  Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const FixedPhaseProblem prob = random_problem(rng, 4, 1, 0, /*p_max=*/2.0);
    const double expect =
        std::log2(1.0 + 2.0 * prob.g_eff[0].squaredNorm() / prob.noise[0]);
    const BeamformerSet init = mrt_initial_beams(prob);
    const BeamResult res = run_beamforming_sca(lift_beams(init), prob);
    CHECK(res.converged);
    CHECK(res.rate_history.back() == doctest::Approx(expect).epsilon(1e-3));
    // the extracted vector is MRT up to a global phase: |g^H w| = ||g|| ||w||
    const double cosine = std::abs(prob.g_eff[0].dot(res.beams.w[0])) /
                          (prob.g_eff[0].norm() * res.beams.w[0].norm());
    CHECK(cosine == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("zero interference tolerance with spanning PU channels forces W = 0") {
  Rng rng(10);
  FixedPhaseProblem prob = random_problem(rng, 3, 2, 3, 1.0, /*p_tol=*/0.0);
  // three independent PU channels span C^3 almost surely
  BeamSubproblemState state;
  state.w_mat = zero_lifted(3, 2);
  const BeamSubproblemState next = solve_beam_iteration(state, prob);
  for (const auto& w : next.w_mat.w_mat) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero tolerance against a single PU channel leaves the complement") {
  Rng rng(11);
  FixedPhaseProblem prob = random_problem(rng, 3, 1, 1, 1.0, /*p_tol=*/0.0);
  const BeamResult res =
      run_beamforming_sca(zero_lifted(3, 1), prob);
  // returned beam must be exactly orthogonal to the hard-zero PU channel
  CHECK(std::abs(prob.l_eff[0].dot(res.beams.w[0])) < 1e-9);
  CHECK(res.beams.w[0].norm() > 0.1);  // and still carry power
}

TEST_CASE("rank-one extraction basics") {
  CMat w = CMat::Zero(3, 3);
  w(0, 0) = 4.0;
  const RankOneExtraction ex = extract_rank_one(w);
  CHECK(ex.residual == 0.0);
  CHECK(std::abs(ex.w[0]) == doctest::Approx(2.0));
  CHECK(std::abs(ex.w[1]) < 1e-12);

  const RankOneExtraction id = extract_rank_one(CMat::Identity(2, 2));
  CHECK(id.residual == doctest::Approx(1.0));

  const RankOneExtraction zero = extract_rank_one(CMat::Zero(2, 2));
  CHECK(zero.residual == 0.0);
  CHECK(zero.w.norm() == 0.0);
}

TEST_CASE("SCA ascent: sum rate never decreases from a feasible start") {
  Rng rng(12);
  for (int seed = 0; seed < 20; ++seed) {
    Rng local(100 + seed);
    const FixedPhaseProblem prob = random_problem(local, 4, 2, 2, 1.0, 0.5);
    const BeamformerSet init = mrt_initial_beams(prob);
    const LiftedBeamSet lifted_init = lift_beams(init);
    const double rate_init =
        g_value(lifted_init, prob) - f_value(lifted_init, prob);
    const BeamResult res = run_beamforming_sca(lifted_init, prob);
    CHECK(res.rate_history.back() >= rate_init - 1e-6);
    // per-iteration monotonicity of the true objective
    for (std::size_t i = 1; i < res.rate_history.size(); ++i)
      CHECK(res.rate_history[i] >= res.rate_history[i - 1] - 1e-6);
  }
}

TEST_CASE("converged SDR solutions are rank-one and feasible (20 seeds)") {
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(9000 + seed);
    const FixedPhaseProblem prob = random_problem(rng, 4, 2, 2, 1.0, 0.3);
    const BeamResult res =
        run_beamforming_sca(lift_beams(mrt_initial_beams(prob)), prob);
    for (double r : res.rank_residuals) CHECK(r <= 1e-4);

    // independent feasibility re-check in vector form
    double power = 0.0;
    for (const auto& w : res.beams.w) power += w.squaredNorm();
    CHECK(power <= prob.budgets.p_max * (1.0 + 1e-6));
    for (int i = 0; i < prob.i_users(); ++i) {
      double leak = 0.0;
      for (const auto& w : res.beams.w) leak += std::norm(prob.l_eff[i].dot(w));
      CHECK(leak <= prob.budgets.p_tol[i] * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("restart from a converged point terminates immediately") {
  Rng rng(13);
  const FixedPhaseProblem prob = random_problem(rng, 3, 2, 1, 1.0, 0.5);
  const BeamResult first =
      run_beamforming_sca(lift_beams(mrt_initial_beams(prob)), prob);
  BeamSolveOptions opts;
  const BeamResult second = run_beamforming_sca(first.lifted, prob, opts);
  CHECK(second.iterations <= 1);
  CHECK(second.rate_history.back() ==
        doctest::Approx(first.rate_history.back()).epsilon(1e-6));
}

TEST_CASE("MRT initialization is always feasible") {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const FixedPhaseProblem prob =
        random_problem(rng, 3, 2, 2, 1.0, /*p_tol=*/1e-4);
    const BeamformerSet init = mrt_initial_beams(prob);
    double power = 0.0;
    for (const auto& w : init.w) power += w.squaredNorm();
    CHECK(power <= prob.budgets.p_max * (1.0 + 1e-12));
    for (int i = 0; i < prob.i_users(); ++i) {
      double leak = 0.0;
      for (const auto& w : init.w) leak += std::norm(prob.l_eff[i].dot(w));
      CHECK(leak <= prob.budgets.p_tol[i] * (1.0 + 1e-9));
    }
  }
}
