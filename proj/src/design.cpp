#include "aglq/design.hpp"

#include <algorithm>
#include <stdexcept>

#include "aglq/errors.hpp"

namespace aglq {

GroupSpec::GroupSpec(std::vector<arma::uword> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) {
    throw std::invalid_argument("GroupSpec: empty partition");
  }
  offsets_.reserve(sizes_.size());
  arma::uword acc = 0;
  for (arma::uword d : sizes_) {
    if (d == 0) throw std::invalid_argument("GroupSpec: group size must be >= 1");
    acc += d;
    offsets_.push_back(acc);
  }
}

GroupSpec GroupSpec::singletons(arma::uword p) {
  return GroupSpec(std::vector<arma::uword>(p, 1));
}

GroupSpec GroupSpec::uniform(arma::uword p, arma::uword d) {
  return GroupSpec(std::vector<arma::uword>(p, d));
}

GroupedDesign::GroupedDesign(arma::mat X_, GroupSpec groups_)
    : X(std::move(X_)), groups(std::move(groups_)) {
  if (X.n_cols != groups.r()) {
    throw data_error("GroupedDesign: X has " + std::to_string(X.n_cols) +
                     " columns but the partition covers " +
                     std::to_string(groups.r()));
  }
  if (!X.is_finite()) {
    throw data_error("GroupedDesign: non-finite entries in X");
  }
}

GroupedCoefficients::GroupedCoefficients(arma::vec beta_, GroupSpec groups_)
    : beta(std::move(beta_)), groups(std::move(groups_)) {
  if (beta.n_elem != groups.r()) {
    throw data_error("GroupedCoefficients: length " +
                     std::to_string(beta.n_elem) + " does not match r = " +
                     std::to_string(groups.r()));
  }
}

bool ActiveSet::contains(arma::uword j) const {
  return std::binary_search(indices.begin(), indices.end(), j);
}

arma::mat gram(const GroupedDesign& design) {
  if (design.n() == 0) {
    throw std::invalid_argument("gram: empty design");
  }
  arma::mat U = design.X.t() * design.X / static_cast<double>(design.n());
  return 0.5 * (U + U.t());
}

AssumptionReport assumption_report(const GroupedDesign& design) {
  AssumptionReport rep;
  const arma::mat& X = design.X;
  rep.max_inf_norm = X.n_elem ? arma::abs(X).max() : 0.0;

  double max_row_norm = 0.0;
  for (arma::uword i = 0; i < X.n_rows; ++i) {
    max_row_norm = std::max(max_row_norm, arma::norm(X.row(i), 2));
  }
  rep.tl_statistic =
      std::sqrt(static_cast<double>(design.p()) / static_cast<double>(design.n())) *
      max_row_norm;

  arma::vec ev;
  if (arma::eig_sym(ev, gram(design))) {
    rep.min_eigen = ev.min();
    rep.max_eigen = ev.max();
    rep.degenerate = rep.min_eigen <= 1e-12;
  } else {
    rep.eigen_ok = false;
  }
  return rep;
}

ActiveSet active_set(const GroupedCoefficients& beta, double threshold) {
  if (threshold < 0.0) {
    throw std::invalid_argument("active_set: threshold must be >= 0");
  }
  ActiveSet out;
  for (arma::uword j = 0; j < beta.groups.p(); ++j) {
    if (beta.group_norm(j) > threshold) out.indices.push_back(j);
  }
  return out;
}

}  // namespace aglq
