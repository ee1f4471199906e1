#include "aglq/inference.hpp"

#include <stdexcept>

#include "aglq/errors.hpp"

namespace aglq {

CovarianceEstimate sandwich_covariance(const GroupedDesign& design,
                                       const arma::vec& y, const FitResult& fit,
                                       const LossSpec& spec, double h_floor) {
  if (fit.active.empty()) {
    throw std::invalid_argument("sandwich_covariance: empty active set");
  }
  const arma::vec residuals = y - design.X * fit.beta.beta;
  const LossMoments m = empirical_moments(residuals, spec, h_floor);
  if (!(m.mu_h > 0.0)) {
    throw degenerate_sample_error("sandwich_covariance: mu_h is not positive");
  }

  std::vector<arma::uword> cols;
  for (arma::uword j : fit.active.indices) {
    const arma::uword lo = design.groups.offset(j);
    for (arma::uword k = 0; k < design.groups.size(j); ++k) {
      cols.push_back(lo + k);
    }
  }
  const arma::uvec idx(cols);
  const arma::mat XA = design.X.cols(idx);
  arma::mat UA = XA.t() * XA / static_cast<double>(design.n());
  UA = 0.5 * (UA + UA.t());

  arma::mat R;
  if (!arma::chol(R, UA)) {
    arma::vec ev;
    arma::eig_sym(ev, UA);
    throw ill_conditioned_error("sandwich_covariance: active Gram is rank deficient",
                                ev.min());
  }

  CovarianceEstimate out;
  out.sigma2_over_mu2 = m.sigma2_g / (m.mu_h * m.mu_h);
  const arma::mat Rinv = arma::inv(arma::trimatu(R));
  out.cov = out.sigma2_over_mu2 * (Rinv * Rinv.t()) /
            static_cast<double>(design.n());
  out.cov = 0.5 * (out.cov + out.cov.t());
  out.active = fit.active;
  out.columns = idx;
  return out;
}

}  // namespace aglq
