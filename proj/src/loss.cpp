#include "aglq/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "aglq/errors.hpp"

namespace aglq {

LossSpec::LossSpec(double tau_, double q_) : tau(tau_), q(q_) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("LossSpec: tau must lie in (0,1), got " +
                                std::to_string(tau_));
  }
  if (!(q > 1.0)) {
    throw std::invalid_argument(
        "LossSpec: q must be > 1 (q = 1 is not supported), got " +
        std::to_string(q_));
  }
}

namespace {

inline double side_weight(double x, double tau) {
  // Ties at x = 0 take the x >= 0 branch; rho and gkernel are continuous
  // there, so the choice only shows up in hkernel for q < 2.
  return x < 0.0 ? 1.0 - tau : tau;
}

inline void check_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(what) + ": non-finite input");
  }
}

}  // namespace

double rho(double u, const LossSpec& spec) {
  check_finite(u, "rho");
  if (u == 0.0) return 0.0;
  return side_weight(u, spec.tau) * std::pow(std::abs(u), spec.q);
}

double gkernel(double eps, const LossSpec& spec) {
  check_finite(eps, "gkernel");
  if (eps == 0.0) return 0.0;
  const double w = side_weight(eps, spec.tau);
  const double mag = spec.q * w * std::pow(std::abs(eps), spec.q - 1.0);
  return eps >= 0.0 ? -mag : mag;
}

double hkernel(double eps, const LossSpec& spec, double floor) {
  check_finite(eps, "hkernel");
  if (!(floor > 0.0)) {
    throw std::invalid_argument("hkernel: floor must be > 0");
  }
  const double w = side_weight(eps, spec.tau);
  const double a = std::max(std::abs(eps), floor);
  return spec.q * (spec.q - 1.0) * w * std::pow(a, spec.q - 2.0);
}

arma::vec gkernel(const arma::vec& eps, const LossSpec& spec) {
  arma::vec out(eps.n_elem);
  for (arma::uword i = 0; i < eps.n_elem; ++i) out[i] = gkernel(eps[i], spec);
  return out;
}

arma::vec hkernel(const arma::vec& eps, const LossSpec& spec, double floor) {
  arma::vec out(eps.n_elem);
  for (arma::uword i = 0; i < eps.n_elem; ++i) {
    out[i] = hkernel(eps[i], spec, floor);
  }
  return out;
}

double estimate_tau(const arma::vec& sample, bool standardize) {
  if (sample.n_elem < 2) {
    throw degenerate_sample_error("estimate_tau: need at least 2 values");
  }
  if (!sample.is_finite()) {
    throw std::domain_error("estimate_tau: non-finite input");
  }
  arma::vec s = sample;
  if (standardize) {
    const double sd = arma::stddev(s);  // n-1 divisor
    if (sd == 0.0) {
      throw degenerate_sample_error("estimate_tau: constant sample");
    }
    s = (s - arma::mean(s)) / sd;
  } else if (arma::stddev(s) == 0.0) {
    throw degenerate_sample_error("estimate_tau: constant sample");
  }
  double neg = 0.0, pos = 0.0;
  for (double v : s) {
    if (v < 0.0) neg += v;
    else if (v > 0.0) pos += v;
  }
  const double den = neg - pos;
  if (den == 0.0) {
    throw degenerate_sample_error("estimate_tau: zero denominator");
  }
  return neg / den;
}

LossMoments empirical_moments(const arma::vec& residuals, const LossSpec& spec,
                              double h_floor) {
  if (residuals.n_elem < 2) {
    throw degenerate_sample_error("empirical_moments: need >= 2 residuals");
  }
  const arma::vec gs = gkernel(residuals, spec);
  const arma::vec hs = hkernel(residuals, spec, h_floor);
  LossMoments m;
  m.mu_h = arma::mean(hs);
  m.sigma2_g = arma::var(gs);  // unbiased n-1 divisor
  return m;
}

}  // namespace aglq
