#pragma once

#include <armadillo>
#include <vector>

namespace aglq {

// Partition of r design columns into p contiguous groups of sizes d_1..d_p.
class GroupSpec {
 public:
  GroupSpec() = default;
  explicit GroupSpec(std::vector<arma::uword> sizes);

  // p singleton groups.
  static GroupSpec singletons(arma::uword p);
  // p groups of equal size d.
  static GroupSpec uniform(arma::uword p, arma::uword d);

  arma::uword p() const { return sizes_.size(); }
  arma::uword r() const { return offsets_.empty() ? 0 : offsets_.back(); }
  arma::uword size(arma::uword j) const { return sizes_[j]; }
  arma::uword offset(arma::uword j) const { return j == 0 ? 0 : offsets_[j - 1]; }
  const std::vector<arma::uword>& sizes() const { return sizes_; }

  arma::subview_col<double> block(arma::vec& v, arma::uword j) const {
    return v.subvec(offset(j), offset(j) + sizes_[j] - 1);
  }
  arma::vec block(const arma::vec& v, arma::uword j) const {
    return v.subvec(offset(j), offset(j) + sizes_[j] - 1);
  }
  double block_norm(const arma::vec& v, arma::uword j) const {
    return arma::norm(block(v, j), 2);
  }

  bool operator==(const GroupSpec& o) const { return sizes_ == o.sizes_; }

 private:
  std::vector<arma::uword> sizes_;
  std::vector<arma::uword> offsets_;  // inclusive prefix sums, size p
};

// n x r design with a group partition of its columns. Immutable after
// construction; safe to share across replication workers.
struct GroupedDesign {
  arma::mat X;
  GroupSpec groups;

  GroupedDesign() = default;
  GroupedDesign(arma::mat X_, GroupSpec groups_);

  arma::uword n() const { return X.n_rows; }
  arma::uword r() const { return X.n_cols; }
  arma::uword p() const { return groups.p(); }
};

// Coefficient vector carrying its group partition.
struct GroupedCoefficients {
  arma::vec beta;
  GroupSpec groups;

  GroupedCoefficients() = default;
  GroupedCoefficients(arma::vec beta_, GroupSpec groups_);

  double group_norm(arma::uword j) const { return groups.block_norm(beta, j); }
};

// Sorted indices of groups whose block norm exceeds a threshold.
struct ActiveSet {
  std::vector<arma::uword> indices;

  bool contains(arma::uword j) const;
  arma::uword size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  bool operator==(const ActiveSet& o) const { return indices == o.indices; }
};

// Diagnostics for the usual design-regularity checks; informational only.
struct AssumptionReport {
  double max_inf_norm = 0.0;   // max_i ||x_i||_inf
  double min_eigen = 0.0;      // extremal eigenvalues of gram(design)
  double max_eigen = 0.0;
  double tl_statistic = 0.0;   // sqrt(p/n) * max_i ||x_i||_2
  bool eigen_ok = true;        // eigensolver succeeded
  bool degenerate = false;     // min_eigen below numerical zero
};

// U_n = (1/n) X'X, explicitly symmetrized.
arma::mat gram(const GroupedDesign& design);

AssumptionReport assumption_report(const GroupedDesign& design);

// Groups with ||beta_j||_2 > threshold. Use threshold 0 on solver output
// (the prox produces exact zeros); default 1e-8 suits externally supplied
// coefficient vectors.
ActiveSet active_set(const GroupedCoefficients& beta, double threshold);

}  // namespace aglq
