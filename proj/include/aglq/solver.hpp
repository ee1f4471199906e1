#pragma once

#include <armadillo>
#include <optional>
#include <vector>

#include "aglq/design.hpp"
#include "aglq/loss.hpp"

namespace aglq {

// Group-wise penalty lambda * sum_j weights[j] * ||beta_j||_2.
// A weight of +inf pins its group to exactly zero; a weight of 0 leaves the
// group unpenalized (used for an optional intercept group).
struct PenaltySpec {
  double lambda = 0.0;
  double gamma = 1.0;
  arma::vec weights;
  bool cap_applied = false;

  PenaltySpec() = default;
  PenaltySpec(double lambda_, double gamma_, arma::vec weights_,
              bool cap_applied_ = false);
};

struct SolverOptions {
  arma::uword max_iter = 100000;
  double tol_obj = 1e-10;   // relative objective decrease
  double tol_kkt = 1e-6;    // stationarity residual
  double step_init = 1.0;   // initial proximal step (1/L)
  double backtrack_factor = 0.5;
  double h_floor = 1e-6;    // curvature clamp for q < 2

  void validate() const;
};

struct FitResult {
  GroupedCoefficients beta;
  ActiveSet active;             // threshold 0: zero groups are exact zeros
  double objective = 0.0;       // recomputed from scratch at the final beta
  arma::uword iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // accepted-iteration objective values
  double lipschitz_estimate = 0.0;      // final curvature bound 1/step
};

// G_n(beta) = sum_i rho(y_i - x_i' beta). Zero exactly at zero residuals.
double objective_unpenalized(const GroupedDesign& design, const arma::vec& y,
                             const arma::vec& beta, const LossSpec& spec);

// Q_n(beta) = n^-1 G_n(beta) + lambda * sum_j w_j ||beta_j||_2.
// The 1/n factor applies to the loss only.
double objective_penalized(const GroupedDesign& design, const arma::vec& y,
                           const arma::vec& beta, const LossSpec& spec,
                           const PenaltySpec& pen);

// Unpenalized minimizer of G_n (the pilot estimator). Newton iterations with
// the curvature clamp and an Armijo backtracking line search, falling back to
// a plain gradient step when the Newton system fails or does not descend; at
// q = 2 each full Newton step is exactly the tau/(1-tau) reweighted
// least-squares solve. Converged when || (1/n) sum_i g(eps_i) x_i ||_2 <=
// tol_kkt. Throws ill_conditioned_error when the Gram matrix is numerically
// singular; warns on stderr when n < r.
FitResult fit_unpenalized(const GroupedDesign& design, const arma::vec& y,
                          const LossSpec& spec, const SolverOptions& opts = {},
                          const std::optional<arma::vec>& warm_start = std::nullopt);

// Per-group weights ||pilot_j||^-gamma, optionally capped at `cap`.
// A zero-norm pilot group yields `cap` when given, +inf otherwise (the group
// is pinned to zero in the penalized fit).
arma::vec adaptive_weights(const GroupedCoefficients& pilot, double gamma,
                           const std::optional<double>& cap = std::nullopt);

// Proximal map of threshold * ||.||_2: scales v by max(0, 1 - t/||v||), so
// the output is exactly zero whenever ||v|| <= t.
arma::vec group_prox(const arma::vec& v, double threshold);

// Smallest lambda that zeroes every (finitely, positively weighted) group:
// max_j ||(1/n) sum_i g(y_i) x_ij||_2 / w_j, the stationarity bound at the
// origin.
double lambda_max(const GroupedDesign& design, const arma::vec& y,
                  const LossSpec& spec, const arma::vec& weights);

// Penalized minimizer of Q_n by accelerated proximal gradient with
// backtracking on the smooth part and momentum restarts that keep the
// objective monotone. Groups with +inf weight are held at exactly zero.
// Convergence requires both the relative objective decrease <= tol_obj and
// kkt_residual <= tol_kkt. Throws step_size_error if backtracking underflows.
FitResult fit_penalized(const GroupedDesign& design, const arma::vec& y,
                        const LossSpec& spec, const PenaltySpec& pen,
                        const SolverOptions& opts = {},
                        const std::optional<arma::vec>& warm_start = std::nullopt);

// Stationarity certificate at beta. Writing s_j = -(1/n) sum_i g(eps_i) x_ij
// for the negative loss gradient (gkernel is the derivative of
// rho(eps - t) in t, i.e. minus the derivative of the loss in beta), returns
// the max over groups of
//   active j:  || s_j - lambda w_j beta_j / ||beta_j|| ||_2
//   zero j:    max(0, ||s_j||_2 - lambda w_j)
// Pinned groups (w_j = +inf) are constrained and contribute 0.
double kkt_residual(const GroupedDesign& design, const arma::vec& y,
                    const GroupedCoefficients& beta, const LossSpec& spec,
                    const PenaltySpec& pen);

}  // namespace aglq
