#include "aglq/solver.hpp"

#include <cassert>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "aglq/errors.hpp"

namespace aglq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxLipschitz = 1e18;

void check_dims(const GroupedDesign& design, const arma::vec& y,
                const arma::vec& beta) {
  if (y.n_elem != design.n()) {
    throw data_error("solver: y has " + std::to_string(y.n_elem) +
                     " rows, design has " + std::to_string(design.n()));
  }
  if (beta.n_elem != design.r()) {
    throw data_error("solver: beta has " + std::to_string(beta.n_elem) +
                     " entries, design has r = " + std::to_string(design.r()));
  }
}

// n^-1 sum_i rho(eps_i); the smooth part of the penalized objective.
double smooth_value(const GroupedDesign& design, const arma::vec& y,
                    const arma::vec& beta, const LossSpec& spec) {
  const arma::vec eps = y - design.X * beta;
  double acc = 0.0;
  for (double e : eps) acc += rho(e, spec);
  return acc / static_cast<double>(design.n());
}

// Gradient of the smooth part: (1/n) sum_i g(eps_i) x_i.
arma::vec smooth_gradient(const GroupedDesign& design, const arma::vec& y,
                          const arma::vec& beta, const LossSpec& spec) {
  const arma::vec eps = y - design.X * beta;
  return design.X.t() * gkernel(eps, spec) / static_cast<double>(design.n());
}

double penalty_value(const arma::vec& beta, const GroupSpec& groups,
                     const PenaltySpec& pen) {
  double acc = 0.0;
  for (arma::uword j = 0; j < groups.p(); ++j) {
    const double nrm = groups.block_norm(beta, j);
    if (std::isinf(pen.weights[j])) {
      if (nrm > 0.0) return kInf;
      continue;
    }
    acc += pen.weights[j] * nrm;
  }
  return pen.lambda * acc;
}

}  // namespace

PenaltySpec::PenaltySpec(double lambda_, double gamma_, arma::vec weights_,
                         bool cap_applied_)
    : lambda(lambda_), gamma(gamma_), weights(std::move(weights_)),
      cap_applied(cap_applied_) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("PenaltySpec: lambda must be finite and >= 0");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("PenaltySpec: gamma must be > 0");
  }
  for (double w : weights) {
    if (std::isnan(w) || w < 0.0) {
      throw std::invalid_argument(
          "PenaltySpec: weights must be >= 0 (+inf pins a group to zero)");
    }
  }
}

void SolverOptions::validate() const {
  if (max_iter == 0 || !(tol_obj > 0.0) || !(tol_kkt > 0.0) ||
      !(step_init > 0.0) || !(h_floor > 0.0) ||
      !(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw std::invalid_argument("SolverOptions: invalid values");
  }
}

double objective_unpenalized(const GroupedDesign& design, const arma::vec& y,
                             const arma::vec& beta, const LossSpec& spec) {
  check_dims(design, y, beta);
  return smooth_value(design, y, beta, spec) * static_cast<double>(design.n());
}

double objective_penalized(const GroupedDesign& design, const arma::vec& y,
                           const arma::vec& beta, const LossSpec& spec,
                           const PenaltySpec& pen) {
  check_dims(design, y, beta);
  if (pen.weights.n_elem != design.p()) {
    throw data_error("objective_penalized: weight count != group count");
  }
  return smooth_value(design, y, beta, spec) +
         penalty_value(beta, design.groups, pen);
}

FitResult fit_unpenalized(const GroupedDesign& design, const arma::vec& y,
                          const LossSpec& spec, const SolverOptions& opts,
                          const std::optional<arma::vec>& warm_start) {
  opts.validate();
  const arma::uword n = design.n();
  const arma::uword r = design.r();
  check_dims(design, y, arma::vec(r, arma::fill::zeros));
  if (n < r) {
    std::cerr << "fit_unpenalized: warning: n = " << n << " < r = " << r
              << "; the minimizer is not unique\n";
  }

  arma::vec ev;
  const arma::mat U = gram(design);
  if (!arma::eig_sym(ev, U)) {
    throw ill_conditioned_error("fit_unpenalized: eigensolver failed", 0.0);
  }
  if (ev.min() <= 1e-12 * std::max(1.0, ev.max())) {
    throw ill_conditioned_error("fit_unpenalized: singular Gram matrix",
                                ev.min());
  }

  const double nd = static_cast<double>(n);
  arma::vec beta = warm_start ? *warm_start
                              : arma::solve(U, design.X.t() * y / nd);

  FitResult out;
  out.objective_trace.reserve(64);
  double f = smooth_value(design, y, beta, spec);
  out.objective_trace.push_back(f * nd);

  bool converged = false;
  double gnorm = kInf;
  arma::uword iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const arma::vec eps = y - design.X * beta;
    const arma::vec grad = design.X.t() * gkernel(eps, spec) / nd;
    gnorm = arma::norm(grad, 2);
    if (gnorm <= opts.tol_kkt) {
      converged = true;
      break;
    }

    // Newton direction with clamped curvature; at q = 2 a unit step solves
    // the sign-weighted normal equations exactly.
    const arma::vec hs = hkernel(eps, spec, opts.h_floor);
    arma::mat Xh = design.X;
    Xh.each_col() %= hs;
    const arma::mat H = design.X.t() * Xh / nd;
    arma::vec dir;
    const bool solved = arma::solve(dir, H, -grad, arma::solve_opts::no_approx);
    if (!solved || arma::dot(grad, dir) >= 0.0) {
      dir = -grad;
    }

    const double slope = arma::dot(grad, dir);
    double t = 1.0;
    bool accepted = false;
    while (t >= 1e-16) {
      const arma::vec cand = beta + t * dir;
      const double fc = smooth_value(design, y, cand, spec);
      if (fc <= f + 1e-4 * t * slope) {
        beta = cand;
        f = fc;
        accepted = true;
        break;
      }
      t *= opts.backtrack_factor;
    }
    if (!accepted) break;  // stalled; reported as non-convergence
    out.objective_trace.push_back(f * nd);
  }

  out.beta = GroupedCoefficients(beta, design.groups);
  out.active = active_set(out.beta, 0.0);
  out.objective = objective_unpenalized(design, y, beta, spec);
  out.iterations = iter;
  out.kkt_residual = gnorm;
  out.converged = converged;
  return out;
}

arma::vec adaptive_weights(const GroupedCoefficients& pilot, double gamma,
                           const std::optional<double>& cap) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("adaptive_weights: gamma must be > 0");
  }
  if (cap && !(*cap > 0.0)) {
    throw std::invalid_argument("adaptive_weights: cap must be > 0");
  }
  arma::vec w(pilot.groups.p());
  for (arma::uword j = 0; j < pilot.groups.p(); ++j) {
    const double nrm = pilot.group_norm(j);
    if (nrm == 0.0) {
      w[j] = cap ? *cap : kInf;
    } else {
      const double raw = std::pow(nrm, -gamma);
      w[j] = cap ? std::min(raw, *cap) : raw;
    }
  }
  return w;
}

arma::vec group_prox(const arma::vec& v, double threshold) {
  if (threshold < 0.0) {
    throw std::invalid_argument("group_prox: threshold must be >= 0");
  }
  if (threshold == 0.0) return v;
  const double nrm = arma::norm(v, 2);
  if (nrm <= threshold) return arma::vec(v.n_elem, arma::fill::zeros);
  return (1.0 - threshold / nrm) * v;
}

double lambda_max(const GroupedDesign& design, const arma::vec& y,
                  const LossSpec& spec, const arma::vec& weights) {
  check_dims(design, y, arma::vec(design.r(), arma::fill::zeros));
  const arma::vec grad0 =
      design.X.t() * gkernel(y, spec) / static_cast<double>(design.n());
  double lmax = 0.0;
  for (arma::uword j = 0; j < design.p(); ++j) {
    const double w = weights[j];
    if (!std::isfinite(w) || w <= 0.0) continue;  // pinned or unpenalized
    lmax = std::max(lmax, design.groups.block_norm(grad0, j) / w);
  }
  return lmax;
}

namespace {

struct ProxProblem {
  const GroupedDesign& design;
  const arma::vec& y;
  const LossSpec& spec;
  const PenaltySpec& pen;

  double f(const arma::vec& b) const { return smooth_value(design, y, b, spec); }
  arma::vec grad(const arma::vec& b) const {
    return smooth_gradient(design, y, b, spec);
  }
  double P(const arma::vec& b) const {
    return penalty_value(b, design.groups, pen);
  }

  arma::vec prox(const arma::vec& v, double step) const {
    arma::vec z(v.n_elem);
    for (arma::uword j = 0; j < design.p(); ++j) {
      const arma::uword lo = design.groups.offset(j);
      const arma::uword hi = lo + design.groups.size(j) - 1;
      const double w = pen.weights[j];
      if (std::isinf(w)) {
        z.subvec(lo, hi).zeros();
      } else {
        z.subvec(lo, hi) = group_prox(v.subvec(lo, hi), step * pen.lambda * w);
      }
    }
    return z;
  }
};

}  // namespace

FitResult fit_penalized(const GroupedDesign& design, const arma::vec& y,
                        const LossSpec& spec, const PenaltySpec& pen,
                        const SolverOptions& opts,
                        const std::optional<arma::vec>& warm_start) {
  opts.validate();
  check_dims(design, y, arma::vec(design.r(), arma::fill::zeros));
  if (pen.weights.n_elem != design.p()) {
    throw data_error("fit_penalized: weight count != group count");
  }

  ProxProblem prob{design, y, spec, pen};

  arma::vec x = warm_start ? *warm_start
                           : arma::vec(design.r(), arma::fill::zeros);
  // Pinned groups start (and stay) at exactly zero.
  for (arma::uword j = 0; j < design.p(); ++j) {
    if (std::isinf(pen.weights[j])) {
      x.subvec(design.groups.offset(j),
               design.groups.offset(j) + design.groups.size(j) - 1).zeros();
    }
  }

  auto backtracked_step = [&](const arma::vec& v, double& L) -> arma::vec {
    const double fv = prob.f(v);
    const arma::vec gv = prob.grad(v);
    while (true) {
      arma::vec z = prob.prox(v - gv / L, 1.0 / L);
      const arma::vec d = z - v;
      const double model = fv + arma::dot(gv, d) + 0.5 * L * arma::dot(d, d);
      if (prob.f(z) <= model + 1e-12 * std::abs(model) + 1e-300) return z;
      L /= opts.backtrack_factor;
      if (L > kMaxLipschitz) {
        throw step_size_error("fit_penalized: backtracking step underflow");
      }
    }
  };

  FitResult out;
  out.objective_trace.reserve(64);

  double L = 1.0 / opts.step_init;
  double Qx = prob.f(x) + prob.P(x);
  out.objective_trace.push_back(Qx);

  arma::vec x_prev = x;
  arma::vec v = x;  // extrapolated point
  double t = 1.0;
  bool converged = false;
  double kkt = kInf;
  arma::uword iter = 0;

  for (; iter < opts.max_iter; ++iter) {
    // Occasionally probe a larger step so L tracks local curvature.
    L = std::max(L * 0.9, 1e-12);

    arma::vec z = backtracked_step(v, L);
    double Qz = prob.f(z) + prob.P(z);
    if (Qz > Qx) {
      // Extrapolation overshot: take a plain step from x and restart momentum.
      z = backtracked_step(x, L);
      Qz = prob.f(z) + prob.P(z);
      t = 1.0;
    }
    assert(Qz <= Qx + 1e-12 * std::max(1.0, std::abs(Qx)));

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = z + ((t - 1.0) / t_next) * (z - x);
    x_prev = x;
    x = z;
    t = t_next;

    const double rel_dec = (Qx - Qz) / std::max(1.0, std::abs(Qx));
    Qx = Qz;
    out.objective_trace.push_back(Qx);

    if (rel_dec <= opts.tol_obj) {
      kkt = kkt_residual(design, y, GroupedCoefficients(x, design.groups),
                         spec, pen);
      if (kkt <= opts.tol_kkt) {
        converged = true;
        ++iter;
        break;
      }
    }
  }

  if (!converged) {
    kkt = kkt_residual(design, y, GroupedCoefficients(x, design.groups), spec,
                       pen);
    converged = kkt <= opts.tol_kkt;
  }

  out.beta = GroupedCoefficients(x, design.groups);
  out.active = active_set(out.beta, 0.0);
  out.objective = objective_penalized(design, y, x, spec, pen);
  out.iterations = iter;
  out.kkt_residual = kkt;
  out.converged = converged;
  out.lipschitz_estimate = L;
  return out;
}

double kkt_residual(const GroupedDesign& design, const arma::vec& y,
                    const GroupedCoefficients& beta, const LossSpec& spec,
                    const PenaltySpec& pen) {
  check_dims(design, y, beta.beta);
  if (pen.weights.n_elem != design.p()) {
    throw data_error("kkt_residual: weight count != group count");
  }
  // s = -(1/n) sum_i g(eps_i) x_i is the negative gradient of the smooth
  // part, so stationarity on an active group reads s_j = lambda w_j u_j with
  // u_j the unit vector along beta_j.
  const arma::vec s = -smooth_gradient(design, y, beta.beta, spec);
  double res = 0.0;
  for (arma::uword j = 0; j < design.p(); ++j) {
    const double w = pen.weights[j];
    if (std::isinf(w)) continue;  // constrained to zero, not tested
    const arma::vec sj = design.groups.block(s, j);
    const double bnorm = beta.group_norm(j);
    double rj;
    if (bnorm > 0.0) {
      const arma::vec bj = design.groups.block(beta.beta, j);
      rj = arma::norm(sj - pen.lambda * w * bj / bnorm, 2);
    } else {
      rj = std::max(0.0, arma::norm(sj, 2) - pen.lambda * w);
    }
    res = std::max(res, rj);
  }
  return res;
}

}  // namespace aglq
