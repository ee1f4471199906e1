#pragma once

#include <armadillo>

namespace aglq {

// Asymmetric power loss rho_tau(u) = |tau - 1{u<0}| * |u|^q.
// q = 2 is the expectile (asymmetric least squares) case; q = 1 is excluded
// because the downstream solvers need a differentiable loss.
struct LossSpec {
  double tau = 0.5;
  double q = 2.0;

  LossSpec() = default;
  LossSpec(double tau_, double q_);
};

// Plug-in moments of the derivative kernels over a residual sample:
// mu_h = mean of the curvature kernel, sigma2_g = variance of the gradient
// kernel (unbiased n-1 divisor).
struct LossMoments {
  double mu_h = 0.0;
  double sigma2_g = 0.0;
};

// Loss value at u. Nonnegative, zero only at u = 0, convex for q > 1.
double rho(double u, const LossSpec& spec);

// d/dt rho(eps - t) at t = 0. Continuous in eps for q > 1.
double gkernel(double eps, const LossSpec& spec);

// d^2/dt^2 rho(eps - t) at t = 0, with |eps| clamped below by `floor` to
// tame the singularity at eps = 0 when q < 2 (the floor is inert at q = 2).
double hkernel(double eps, const LossSpec& spec, double floor = 1e-6);

// Vectorised kernels over a residual vector.
arma::vec gkernel(const arma::vec& eps, const LossSpec& spec);
arma::vec hkernel(const arma::vec& eps, const LossSpec& spec,
                  double floor = 1e-6);

// Index estimator tau_hat = sum(s*1{s<0}) / (sum(s*1{s<0}) - sum(s*1{s>0})).
// By default the sample is first standardized to zero mean and unit variance
// ("normalized" protocol); note that exact mean-centering forces the ratio to
// 1/2, so pass standardize = false to evaluate the index on the raw scale,
// where it locates the asymmetry level at which the sample's zero point sits.
// Throws degenerate_sample_error on samples of size < 2, constant samples, or
// a vanishing denominator.
double estimate_tau(const arma::vec& sample, bool standardize = true);

// Sample moments of the kernels over residuals; needs >= 2 values.
LossMoments empirical_moments(const arma::vec& residuals, const LossSpec& spec,
                              double h_floor = 1e-6);

}  // namespace aglq
