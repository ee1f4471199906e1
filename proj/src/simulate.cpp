#include "aglq/simulate.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "aglq/errors.hpp"
#include "aglq/rng.hpp"
#include "aglq/tuning.hpp"

namespace aglq::sim {

namespace {

constexpr std::uint64_t kTauStream = 0;
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kErrorStream = 2;
constexpr std::uint64_t kBetaStream = 3;
constexpr unsigned kMaxRegenAttempts = 100;

arma::vec draw_errors(ErrorDist dist, arma::uword n, std::mt19937_64& rng) {
  arma::vec out(n);
  switch (dist) {
    case ErrorDist::std_normal: {
      std::normal_distribution<double> d(0.0, 1.0);
      for (auto& v : out) v = d(rng);
      break;
    }
    case ErrorDist::shifted_chi2: {
      std::normal_distribution<double> d(-1.2, 0.4);
      std::chi_squared_distribution<double> c(1.0);
      for (auto& v : out) v = d(rng) + c(rng);
      break;
    }
    case ErrorDist::shifted_exp: {
      std::exponential_distribution<double> d(1.0);
      for (auto& v : out) v = d(rng) - 1.0;
      break;
    }
    case ErrorDist::cauchy: {
      std::cauchy_distribution<double> d(0.0, 0.1);
      for (auto& v : out) v = d(rng);
      break;
    }
  }
  return out;
}

}  // namespace

arma::vec ungrouped_reference_beta() { return {1.0, -2.0, 0.5, 4.0, -6.0}; }

arma::vec grouped_reference_beta() {
  return {0.5, 1.0, 1.5, 1.0, 0.5,
          1.0, 1.0, 1.0, 1.0, 1.0,
          -1.0, 0.0, 1.0, 2.0, 1.5,
          -1.5, 1.0, 0.5, 0.5, 0.5};
}

arma::uword ScenarioSpec::resolve_p() const {
  const double nd = static_cast<double>(n);
  switch (p_rule) {
    case PRule::explicit_p: return p_explicit;
    case PRule::n_over_2: return static_cast<arma::uword>(std::floor(nd / 2.0));
    case PRule::n_over_log_n:
      return static_cast<arma::uword>(std::floor(nd / std::log(nd)));
    case PRule::n_over_5: return static_cast<arma::uword>(std::floor(nd / 5.0));
    case PRule::n_over_2_log_n:
      return static_cast<arma::uword>(std::floor(nd / (2.0 * std::log(nd))));
  }
  throw std::logic_error("unreachable");
}

arma::uword ScenarioSpec::resolve_p0() const {
  const double nd = static_cast<double>(n);
  switch (p0_rule) {
    case P0Rule::explicit_p0: return p0_explicit;
    case P0Rule::two_sqrt_n:
      return 2 * static_cast<arma::uword>(std::floor(std::sqrt(nd)));
    case P0Rule::two_n_quarter:
      return 2 * static_cast<arma::uword>(std::floor(std::pow(nd, 0.25)));
    case P0Rule::two_sqrt_n_over_5:
      return 2 * static_cast<arma::uword>(std::floor(std::sqrt(nd) / 5.0));
  }
  throw std::logic_error("unreachable");
}

void ScenarioSpec::validate() const {
  if (n < 2) throw data_error("scenario: n must be >= 2");
  if (group_size == 0) throw data_error("scenario: group_size must be >= 1");
  if (!(q > 1.0)) throw data_error("scenario: q must be > 1");
  if (!(gamma > 0.0)) throw data_error("scenario: gamma must be > 0");
  const arma::uword p = resolve_p();
  const arma::uword p0 = resolve_p0();
  if (p == 0) throw data_error("scenario: p resolves to 0");
  if (p0 > p) {
    throw data_error("scenario: p0 = " + std::to_string(p0) + " exceeds p = " +
                     std::to_string(p));
  }
  if (p * group_size > static_cast<arma::uword>(n)) {
    throw data_error("scenario: r = p * group_size exceeds n; every draw would "
                     "be singular");
  }
  if (beta_fixed && beta_fixed->n_elem != p0 * group_size) {
    throw data_error("scenario: beta has " + std::to_string(beta_fixed->n_elem) +
                     " entries, expected p0 * group_size = " +
                     std::to_string(p0 * group_size));
  }
  if (tau_fixed && !(*tau_fixed > 0.0 && *tau_fixed < 1.0)) {
    throw data_error("scenario: tau must lie in (0,1)");
  }
}

double scenario_tau(const ScenarioSpec& spec) {
  if (spec.tau_fixed) return *spec.tau_fixed;
  if (spec.error == ErrorDist::cauchy) return 0.5;
  auto rng = make_stream(spec.seed, 0, kTauStream);
  const arma::vec draws = draw_errors(spec.error, 1000000, rng);
  // Raw scale: the draws are the error distribution itself, and the index has
  // to locate the asymmetry level at which zero is the distribution's pivot.
  return estimate_tau(draws, /*standardize=*/false);
}

Generated generate(const ScenarioSpec& spec, arma::uword replication) {
  return generate(spec, replication, scenario_tau(spec));
}

Generated generate(const ScenarioSpec& spec, arma::uword replication, double tau) {
  spec.validate();
  const arma::uword p = spec.resolve_p();
  const arma::uword p0 = spec.resolve_p0();
  const arma::uword d = spec.group_size;
  const arma::uword r = p * d;
  const arma::uword n = static_cast<arma::uword>(spec.n);
  const GroupSpec groups = GroupSpec::uniform(p, d);

  arma::vec beta0(r, arma::fill::zeros);
  if (spec.beta_random) {
    auto rng = make_stream(spec.seed, replication, kBetaStream);
    std::normal_distribution<double> nd(0.0, std::sqrt(2.0));
    for (arma::uword k = 0; k < p0 * d; ++k) beta0[k] = nd(rng);
  } else if (spec.beta_fixed) {
    beta0.head(p0 * d) = *spec.beta_fixed;
  } else {
    const arma::vec ref = d == 1 ? ungrouped_reference_beta()
                                 : grouped_reference_beta();
    if (ref.n_elem != p0 * d) {
      throw data_error(
          "scenario: no beta given and the reference pattern does not match "
          "p0 * group_size");
    }
    beta0.head(p0 * d) = ref;
  }

  for (unsigned attempt = 0; attempt < kMaxRegenAttempts; ++attempt) {
    auto xrng = make_stream(spec.seed, replication, kDesignStream + 16 * attempt);
    std::normal_distribution<double> nd(0.0, 1.0);
    arma::mat X(n, r);
    for (arma::uword i = 0; i < n; ++i) {
      for (arma::uword k = 0; k < r; ++k) X(i, k) = nd(xrng);
    }
    GroupedDesign design(std::move(X), groups);

    arma::vec ev;
    if (!arma::eig_sym(ev, gram(design)) ||
        ev.min() < spec.min_eigen_threshold) {
      continue;
    }

    auto erng = make_stream(spec.seed, replication, kErrorStream + 16 * attempt);
    const arma::vec eps = draw_errors(spec.error, n, erng);

    Generated out;
    out.y = design.X * beta0 + eps;
    out.design = std::move(design);
    out.beta0 = GroupedCoefficients(beta0, groups);
    out.tau = tau;
    out.regen_attempts = attempt;
    return out;
  }
  throw data_error("generate: exceeded " + std::to_string(kMaxRegenAttempts) +
                   " degenerate draws; the scenario is too close to singular");
}

namespace {

ReplicationRecord run_one(const ScenarioSpec& spec, arma::uword rep, double tau,
                          const EstimatorConfig& config) {
  const Generated gen = generate(spec, rep, tau);
  const LossSpec loss(tau, spec.q);
  const long n = spec.n;

  const FitResult pilot =
      fit_unpenalized(gen.design, gen.y, loss, config.solver);

  std::optional<double> cap;
  if (config.cap_weights) cap = std::sqrt(static_cast<double>(n));
  const arma::vec weights = adaptive_weights(pilot.beta, spec.gamma, cap);

  const double lambda =
      config.lambda ? *config.lambda
                    : config.lambda_scale * lambda_schedule(n, spec.gamma);
  const PenaltySpec pen(lambda, spec.gamma, weights, config.cap_weights);

  const FitResult fit =
      fit_penalized(gen.design, gen.y, loss, pen, config.solver);

  const ActiveSet truth = active_set(gen.beta0, 0.0);
  const ActiveSet est = fit.active;

  ReplicationRecord rec;
  rec.replication = rep;
  for (arma::uword j : est.indices) {
    if (truth.contains(j)) ++rec.card_true_nonzero;
    else ++rec.card_false_nonzero;
  }
  const arma::uword p = gen.design.p();
  double err_all = 0.0, err_active = 0.0;
  for (arma::uword j = 0; j < p; ++j) {
    const double e1 = arma::norm(
        gen.design.groups.block(fit.beta.beta, j) -
            gen.design.groups.block(gen.beta0.beta, j), 1);
    err_all += e1;
    if (truth.contains(j)) err_active += e1;
  }
  rec.abs_err_all = err_all / static_cast<double>(p);
  rec.abs_err_active = err_active / static_cast<double>(p);
  rec.converged = pilot.converged && fit.converged;
  rec.iterations = fit.iterations;
  rec.kkt_residual = fit.kkt_residual;
  rec.regen_attempts = gen.regen_attempts;

  if (rec.card_true_nonzero > truth.size() ||
      rec.card_false_nonzero > p - truth.size()) {
    throw std::logic_error("run: cardinality bounds violated");
  }
  return rec;
}

}  // namespace

SimulationReport run(const ScenarioSpec& spec, arma::uword reps,
                     const EstimatorConfig& config) {
  spec.validate();
  if (reps == 0) throw std::invalid_argument("run: reps must be >= 1");

  const double tau = scenario_tau(spec);
  SimulationReport rep;
  rep.n = spec.n;
  rep.p = spec.resolve_p();
  rep.p0 = spec.resolve_p0();
  rep.r = rep.p * spec.group_size;
  rep.reps = reps;
  rep.tau = tau;
  rep.gamma = spec.gamma;
  rep.lambda = config.lambda
                   ? *config.lambda
                   : config.lambda_scale * lambda_schedule(spec.n, spec.gamma);
  rep.records.resize(reps);

  const unsigned threads =
      std::max(1u, std::min<unsigned>(config.threads, reps));
  if (threads == 1) {
    for (arma::uword m = 0; m < reps; ++m) {
      rep.records[m] = run_one(spec, m, tau, config);
    }
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<arma::uword> next{0};
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const arma::uword m = next.fetch_add(1);
          if (m >= reps) return;
          try {
            rep.records[m] = run_one(spec, m, tau, config);
          } catch (...) {
            std::scoped_lock lk(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Aggregate in replication order so the report is schedule-independent.
  double sum_true = 0.0, sum_false = 0.0, sum_all = 0.0, sum_active = 0.0;
  for (const auto& r : rep.records) {
    sum_true += static_cast<double>(r.card_true_nonzero);
    sum_false += static_cast<double>(r.card_false_nonzero);
    sum_all += r.abs_err_all;
    sum_active += r.abs_err_active;
    if (!r.converged) ++rep.n_nonconverged;
    rep.n_regenerated += r.regen_attempts;
  }
  const double M = static_cast<double>(reps);
  rep.mean_true_nonzero = sum_true / M;
  rep.mean_false_nonzero = sum_false / M;
  rep.mean_abs_all = sum_all / M;
  rep.mean_abs_active = sum_active / M;

  // The true active-set size is p0 unless the supplied signal is all zero.
  arma::uword card_A = rep.p0;
  if (spec.beta_fixed && !spec.beta_random && rep.p0 > 0) {
    GroupedCoefficients b0(*spec.beta_fixed,
                           GroupSpec::uniform(rep.p0, spec.group_size));
    card_A = active_set(b0, 0.0).size();
  }
  rep.degenerate_signal = card_A == 0;
  rep.pct_true = card_A > 0 ? 100.0 * rep.mean_true_nonzero /
                                  static_cast<double>(card_A)
                            : 0.0;
  rep.pct_false_defined = rep.p > card_A;
  rep.pct_false = rep.pct_false_defined
                      ? 100.0 * rep.mean_false_nonzero /
                            static_cast<double>(rep.p - card_A)
                      : 0.0;
  return rep;
}

SweepTable gamma_sweep(const ScenarioSpec& spec, const std::vector<double>& gammas,
                       arma::uword reps, const EstimatorConfig& config) {
  if (gammas.empty()) throw std::invalid_argument("gamma_sweep: empty list");
  SweepTable table;
  table.swept = "gamma";
  for (double g : gammas) {
    ScenarioSpec s = spec;
    s.gamma = g;
    const SimulationReport r = run(s, reps, config);
    SweepRow row;
    row.value = g;
    row.pct_true = r.pct_true;
    row.pct_false = r.pct_false;
    row.mean_true_nonzero = r.mean_true_nonzero;
    row.mean_false_nonzero = r.mean_false_nonzero;
    row.mean_abs_all = r.mean_abs_all;
    row.mean_abs_active = r.mean_abs_active;
    row.n_nonconverged = r.n_nonconverged;
    row.degenerate = r.degenerate_signal;
    table.rows.push_back(row);
  }
  return table;
}

SweepTable signal_sweep(const ScenarioSpec& spec, const std::vector<double>& v_values,
                        arma::uword reps, const EstimatorConfig& config) {
  if (v_values.empty()) throw std::invalid_argument("signal_sweep: empty list");
  if (spec.group_size != 1) {
    throw std::invalid_argument("signal_sweep: requires singleton groups");
  }
  SweepTable table;
  table.swept = "v";
  for (double v : v_values) {
    ScenarioSpec s = spec;
    s.p0_rule = P0Rule::explicit_p0;
    s.p0_explicit = 1;
    s.beta_random = false;
    s.beta_fixed = arma::vec{v * 1e-2};
    const SimulationReport r = run(s, reps, config);
    SweepRow row;
    row.value = v;
    row.beta_norm = std::abs(v) * 1e-2;
    row.pct_true = r.pct_true;
    row.pct_false = r.pct_false;
    row.mean_true_nonzero = r.mean_true_nonzero;
    row.mean_false_nonzero = r.mean_false_nonzero;
    row.mean_abs_all = r.mean_abs_all;
    row.mean_abs_active = r.mean_abs_active;
    row.n_nonconverged = r.n_nonconverged;
    row.degenerate = r.degenerate_signal;
    table.rows.push_back(row);
    if (!row.degenerate) {
      if (!table.v95 && row.pct_true >= 95.0) table.v95 = v;
      if (!table.v99 && row.pct_true >= 99.0) table.v99 = v;
    }
  }
  return table;
}

namespace {

const char* bool_name(bool b) { return b ? "true" : "false"; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string structure_name(Structure s) {
  switch (s) {
    case Structure::ungrouped_fixed: return "ungrouped_fixed";
    case Structure::ungrouped_growing: return "ungrouped_growing";
    case Structure::grouped_fixed: return "grouped_fixed";
    case Structure::grouped_growing: return "grouped_growing";
  }
  return "?";
}

std::string error_name(ErrorDist e) {
  switch (e) {
    case ErrorDist::std_normal: return "std_normal";
    case ErrorDist::shifted_chi2: return "shifted_chi2";
    case ErrorDist::shifted_exp: return "shifted_exp";
    case ErrorDist::cauchy: return "cauchy";
  }
  return "?";
}

std::string report_csv(const SimulationReport& r) {
  std::ostringstream os;
  os << "n,p,p0,r,reps,tau,lambda,gamma,mean_true_nonzero,mean_false_nonzero,"
        "pct_true,pct_false,pct_false_defined,mean_abs_all,mean_abs_active,"
        "n_nonconverged,n_regenerated\n";
  os << r.n << ',' << r.p << ',' << r.p0 << ',' << r.r << ',' << r.reps << ','
     << fmt(r.tau) << ',' << fmt(r.lambda) << ',' << fmt(r.gamma) << ','
     << fmt(r.mean_true_nonzero) << ',' << fmt(r.mean_false_nonzero) << ','
     << fmt(r.pct_true) << ',' << fmt(r.pct_false) << ','
     << bool_name(r.pct_false_defined) << ',' << fmt(r.mean_abs_all) << ','
     << fmt(r.mean_abs_active) << ',' << r.n_nonconverged << ','
     << r.n_regenerated << '\n';
  return os.str();
}

std::string replications_csv(const SimulationReport& r) {
  std::ostringstream os;
  os << "replication,card_true_nonzero,card_false_nonzero,abs_err_all,"
        "abs_err_active,converged,iterations,kkt_residual,regen_attempts\n";
  for (const auto& rec : r.records) {
    os << rec.replication << ',' << rec.card_true_nonzero << ','
       << rec.card_false_nonzero << ',' << fmt(rec.abs_err_all) << ','
       << fmt(rec.abs_err_active) << ',' << bool_name(rec.converged) << ','
       << rec.iterations << ',' << fmt(rec.kkt_residual) << ','
       << rec.regen_attempts << '\n';
  }
  return os.str();
}

std::string sweep_csv(const SweepTable& t) {
  std::ostringstream os;
  os << "sweep,value,beta_norm,pct_true,pct_false,mean_true_nonzero,"
        "mean_false_nonzero,mean_abs_all,mean_abs_active,n_nonconverged,"
        "degenerate\n";
  for (const auto& row : t.rows) {
    os << t.swept << ',' << fmt(row.value) << ',' << fmt(row.beta_norm) << ','
       << fmt(row.pct_true) << ',' << fmt(row.pct_false) << ','
       << fmt(row.mean_true_nonzero) << ',' << fmt(row.mean_false_nonzero)
       << ',' << fmt(row.mean_abs_all) << ',' << fmt(row.mean_abs_active)
       << ',' << row.n_nonconverged << ',' << bool_name(row.degenerate) << '\n';
  }
  return os.str();
}

namespace {

using nlohmann::json;

Structure structure_from(const std::string& s) {
  if (s == "ungrouped_fixed") return Structure::ungrouped_fixed;
  if (s == "ungrouped_growing") return Structure::ungrouped_growing;
  if (s == "grouped_fixed") return Structure::grouped_fixed;
  if (s == "grouped_growing") return Structure::grouped_growing;
  throw data_error("scenario: unknown structure '" + s + "'");
}

ErrorDist error_from(const std::string& s) {
  if (s == "std_normal") return ErrorDist::std_normal;
  if (s == "shifted_chi2") return ErrorDist::shifted_chi2;
  if (s == "shifted_exp") return ErrorDist::shifted_exp;
  if (s == "cauchy") return ErrorDist::cauchy;
  throw data_error("scenario: unknown error distribution '" + s + "'");
}

PRule p_rule_from(const std::string& s) {
  if (s == "n_over_2") return PRule::n_over_2;
  if (s == "n_over_log_n") return PRule::n_over_log_n;
  if (s == "n_over_5") return PRule::n_over_5;
  if (s == "n_over_2_log_n") return PRule::n_over_2_log_n;
  throw data_error("scenario: unknown p_rule '" + s + "'");
}

P0Rule p0_rule_from(const std::string& s) {
  if (s == "two_sqrt_n") return P0Rule::two_sqrt_n;
  if (s == "two_n_quarter") return P0Rule::two_n_quarter;
  if (s == "two_sqrt_n_over_5") return P0Rule::two_sqrt_n_over_5;
  throw data_error("scenario: unknown p0_rule '" + s + "'");
}

const char* p_rule_name(PRule r) {
  switch (r) {
    case PRule::explicit_p: return "explicit";
    case PRule::n_over_2: return "n_over_2";
    case PRule::n_over_log_n: return "n_over_log_n";
    case PRule::n_over_5: return "n_over_5";
    case PRule::n_over_2_log_n: return "n_over_2_log_n";
  }
  return "?";
}

const char* p0_rule_name(P0Rule r) {
  switch (r) {
    case P0Rule::explicit_p0: return "explicit";
    case P0Rule::two_sqrt_n: return "two_sqrt_n";
    case P0Rule::two_n_quarter: return "two_n_quarter";
    case P0Rule::two_sqrt_n_over_5: return "two_sqrt_n_over_5";
  }
  return "?";
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw data_error(std::string("scenario: malformed JSON: ") + e.what());
  }

  ScenarioSpec s;
  try {
    s.n = j.at("n").get<long>();
    if (j.contains("structure")) {
      s.structure = structure_from(j["structure"].get<std::string>());
    }
    const bool grouped = s.structure == Structure::grouped_fixed ||
                         s.structure == Structure::grouped_growing;
    s.group_size = grouped ? 5 : 1;
    if (j.contains("group_size")) s.group_size = j["group_size"].get<arma::uword>();

    if (j.contains("p")) {
      s.p_rule = PRule::explicit_p;
      s.p_explicit = j["p"].get<arma::uword>();
    } else if (j.contains("p_rule")) {
      s.p_rule = p_rule_from(j["p_rule"].get<std::string>());
    } else {
      throw data_error("scenario: need p or p_rule");
    }
    if (j.contains("p0")) {
      s.p0_rule = P0Rule::explicit_p0;
      s.p0_explicit = j["p0"].get<arma::uword>();
    } else if (j.contains("p0_rule")) {
      s.p0_rule = p0_rule_from(j["p0_rule"].get<std::string>());
    } else {
      throw data_error("scenario: need p0 or p0_rule");
    }

    if (j.contains("error")) s.error = error_from(j["error"].get<std::string>());
    if (j.contains("beta")) {
      const auto vals = j["beta"].get<std::vector<double>>();
      s.beta_fixed = arma::vec(vals);
    }
    if (j.contains("beta_rule")) {
      const auto rule = j["beta_rule"].get<std::string>();
      if (rule == "normal_2") s.beta_random = true;
      else if (rule != "fixed") throw data_error("scenario: unknown beta_rule");
    } else if (!s.beta_fixed &&
               (s.structure == Structure::ungrouped_growing ||
                s.structure == Structure::grouped_growing)) {
      s.beta_random = true;
    }
    if (j.contains("gamma")) s.gamma = j["gamma"].get<double>();
    if (j.contains("q")) s.q = j["q"].get<double>();
    if (j.contains("tau") && !j["tau"].is_string()) {
      s.tau_fixed = j["tau"].get<double>();
    }
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("min_eigen_threshold")) {
      s.min_eigen_threshold = j["min_eigen_threshold"].get<double>();
    }
  } catch (const json::exception& e) {
    throw data_error(std::string("scenario: bad field: ") + e.what());
  }
  s.validate();
  return s;
}

ScenarioSpec ScenarioSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("scenario: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ScenarioSpec::to_json() const {
  json j;
  j["n"] = n;
  j["structure"] = structure_name(structure);
  if (p_rule == PRule::explicit_p) j["p"] = p_explicit;
  else j["p_rule"] = p_rule_name(p_rule);
  if (p0_rule == P0Rule::explicit_p0) j["p0"] = p0_explicit;
  else j["p0_rule"] = p0_rule_name(p0_rule);
  j["group_size"] = group_size;
  j["error"] = error_name(error);
  if (beta_fixed) {
    j["beta"] = std::vector<double>(beta_fixed->begin(), beta_fixed->end());
  }
  if (beta_random) j["beta_rule"] = "normal_2";
  j["gamma"] = gamma;
  j["q"] = q;
  if (tau_fixed) j["tau"] = *tau_fixed;
  else j["tau"] = "auto";
  j["seed"] = seed;
  j["min_eigen_threshold"] = min_eigen_threshold;
  return j.dump(2);
}

}  // namespace aglq::sim
