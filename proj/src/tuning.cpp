#include "aglq/tuning.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace aglq {

RegimeSpec::RegimeSpec(double c_, double alpha_, double gamma_, double lambda_exp)
    : c(c_), alpha(alpha_), gamma(gamma_), lambda_exponent(lambda_exp) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw std::invalid_argument("RegimeSpec: c must lie in [0,1]");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("RegimeSpec: gamma must be > 0");
  }
}

namespace {

ConditionCheck make_check(std::string name, double net, bool want_infinity) {
  ConditionCheck ck;
  ck.name = std::move(name);
  ck.requirement = want_infinity ? "-> inf" : "-> 0";
  ck.net_exponent = net;
  if (net == 0.0) {
    ck.verdict = Verdict::indeterminate;
  } else if (want_infinity) {
    ck.verdict = net > 0.0 ? Verdict::pass : Verdict::fail;
  } else {
    ck.verdict = net < 0.0 ? Verdict::pass : Verdict::fail;
  }
  return ck;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "indeterminate";
  }
}

}  // namespace

const ConditionCheck* ConditionReport::find(const std::string& name) const {
  for (const auto& ck : checks) {
    if (ck.name == name) return &ck;
  }
  return nullptr;
}

std::string ConditionReport::to_json() const {
  std::ostringstream os;
  os << "{\"regime\":{\"c\":" << regime.c << ",\"alpha\":" << regime.alpha
     << ",\"gamma\":" << regime.gamma
     << ",\"lambda_exponent\":" << regime.lambda_exponent;
  if (regime.b_exponent) os << ",\"b_exponent\":" << *regime.b_exponent;
  os << "},\"conditions\":[";
  for (size_t i = 0; i < checks.size(); ++i) {
    const auto& ck = checks[i];
    if (i) os << ",";
    os << "{\"name\":\"" << ck.name << "\",\"requirement\":\"" << ck.requirement
       << "\",\"net_exponent\":" << ck.net_exponent << ",\"verdict\":\""
       << verdict_name(ck.verdict) << "\"}";
  }
  os << "],\"all_pass\":" << (all_pass ? "true" : "false") << "}";
  return os.str();
}

ConditionReport check_conditions(const RegimeSpec& regime) {
  const double e = regime.lambda_exponent;
  const double g = regime.gamma;
  ConditionReport rep;
  rep.regime = regime;

  rep.checks.push_back(make_check("E3.1a", 0.5 + e, false));
  rep.checks.push_back(make_check("E3.1b", (g + 1.0) / 2.0 + e, true));
  rep.checks.push_back(make_check("E4.1", e + 0.5 - regime.alpha * g, false));
  rep.checks.push_back(
      make_check("E4.2", e + (1.0 - regime.c) * (1.0 + g) / 2.0, true));

  if (regime.b_exponent) {
    const double eb = *regime.b_exponent;
    rep.checks.push_back(make_check("b_n -> 0", eb, false));
    rep.checks.push_back(make_check("sqrt(n) b_n -> inf", 0.5 + eb, true));
    // p0 = O(n^c) worst case, so lambda_n sqrt(p0) / b_n has net exponent
    // e + c/2 - e_b.
    rep.checks.push_back(
        make_check("lambda_n sqrt(p0) / b_n -> 0", e + regime.c / 2.0 - eb, false));
  }

  rep.all_pass = true;
  for (const auto& ck : rep.checks) {
    if (ck.verdict != Verdict::pass) rep.all_pass = false;
  }
  return rep;
}

double lambda_schedule(long n, double gamma, Scheme scheme,
                       const std::optional<RegimeSpec>& regime) {
  if (n < 1) throw std::invalid_argument("lambda_schedule: n must be >= 1");
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("lambda_schedule: gamma must be > 0");
  }
  if (gamma >= 1.0) {
    std::cerr << "lambda_schedule: warning: gamma = " << gamma
              << " is outside (0,1), the range this schedule is designed for\n";
  }
  const double exponent = -0.5 - gamma / 4.0;
  if (scheme == Scheme::growing_p) {
    if (!regime) {
      throw std::invalid_argument(
          "lambda_schedule: growing_p requires a RegimeSpec");
    }
    RegimeSpec r = *regime;
    r.gamma = gamma;
    r.lambda_exponent = exponent;
    const ConditionReport rep = check_conditions(r);
    const auto* c1 = rep.find("E4.1");
    const auto* c2 = rep.find("E4.2");
    if (c1->verdict != Verdict::pass || c2->verdict != Verdict::pass) {
      throw std::runtime_error(
          "lambda_schedule: growing-p rate conditions fail for this regime: " +
          rep.to_json());
    }
  }
  return std::pow(static_cast<double>(n), exponent);
}

}  // namespace aglq
