#pragma once

#include <optional>
#include <string>
#include <vector>

namespace aglq {

// Exponent regime for the monomial tuning family lambda_n = const * n^e.
// c bounds the group-count growth p = O(n^c); alpha is the signal-floor decay
// exponent; gamma is the weight exponent.
struct RegimeSpec {
  double c = 0.0;
  double alpha = 0.0;
  double gamma = 1.0;
  double lambda_exponent = -0.75;
  // Optional exponent for an auxiliary rate sequence b_n = n^{e_b} used by
  // the p ~ n regime checks.
  std::optional<double> b_exponent;

  RegimeSpec() = default;
  RegimeSpec(double c_, double alpha_, double gamma_, double lambda_exp);
};

enum class Scheme { fixed_p, growing_p };

enum class Verdict { pass, fail, indeterminate };

struct ConditionCheck {
  std::string name;          // e.g. "E3.1a"
  std::string requirement;   // "-> 0" or "-> inf"
  double net_exponent = 0.0; // sign decides; 0 is indeterminate
  Verdict verdict = Verdict::indeterminate;

  bool operator==(const ConditionCheck& o) const {
    return name == o.name && requirement == o.requirement &&
           net_exponent == o.net_exponent && verdict == o.verdict;
  }
};

struct ConditionReport {
  RegimeSpec regime;
  std::vector<ConditionCheck> checks;
  bool all_pass = false;

  const ConditionCheck* find(const std::string& name) const;
  std::string to_json() const;
};

// Evaluates the rate conditions as exponent inequalities on lambda_n = n^e:
//   fixed-p pair:   (a) 1/2 + e < 0          (b) (gamma+1)/2 + e > 0
//   growing-p pair: (1) e + 1/2 - alpha*gamma < 0
//                   (2) e + (1-c)(1+gamma)/2 > 0
// With c = 0 and alpha = 0 the growing-p pair reduces exactly to the fixed-p
// pair. A net exponent of 0 is reported indeterminate (logarithmic factors
// unresolved). When regime.b_exponent is set, the auxiliary-rate checks for
// the p ~ n regime are appended (b_n -> 0, sqrt(n) b_n -> inf,
// lambda_n sqrt(p0) / b_n -> 0 with p0 = O(n^c) taken as worst case).
ConditionReport check_conditions(const RegimeSpec& regime);

// Deterministic schedule lambda_n = n^(-1/2 - gamma/4).
// For Scheme::growing_p a regime must be supplied; its growing-p conditions
// are checked at this schedule's exponent and a failing report throws.
// gamma outside (0,1) is allowed but warned about on stderr.
double lambda_schedule(long n, double gamma, Scheme scheme = Scheme::fixed_p,
                       const std::optional<RegimeSpec>& regime = std::nullopt);

}  // namespace aglq
