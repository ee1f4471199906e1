#pragma once

#include <armadillo>

#include "aglq/design.hpp"
#include "aglq/loss.hpp"
#include "aglq/solver.hpp"

namespace aglq {

// Plug-in covariance of the active-block coefficients:
// (sigma2_g / mu_h^2) * U_A^{-1} / n, with U_A the Gram matrix restricted to
// the active columns and the moments estimated from the fit residuals.
struct CovarianceEstimate {
  double sigma2_over_mu2 = 0.0;
  arma::mat cov;        // r0 x r0, ordered by active columns
  ActiveSet active;
  arma::uvec columns;   // design-column indices backing cov's rows

  arma::vec standard_errors() const { return arma::sqrt(cov.diag()); }
};

// Requires a nonempty active set and an invertible active Gram matrix (solved
// through a symmetric positive-definite factorization; rank deficiency throws
// ill_conditioned_error rather than falling back to a pseudo-inverse).
CovarianceEstimate sandwich_covariance(const GroupedDesign& design,
                                       const arma::vec& y,
                                       const FitResult& fit,
                                       const LossSpec& spec,
                                       double h_floor = 1e-6);

}  // namespace aglq
