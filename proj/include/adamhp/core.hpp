#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adamhp {

using Vec = std::vector<double>;

struct InvalidRange : std::invalid_argument {
  InvalidRange(std::string field_name, const std::string& what)
      : std::invalid_argument(what), field(std::move(field_name)) {}
  std::string field;
};

struct NonFiniteInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndexOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Shared hyper-parameter set. eta and eps are derived, never set directly:
/// eta = C0 * sqrt(1 - beta2), eps = eps0 * sqrt(1 - beta2).
struct Hyperparams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double C0 = 1.0;
  double eps0 = 1.0;
  long T = 1;
  int d = 1;
  double eta = 0.0;
  double eps = 0.0;
};

struct HyperparamIssue {
  std::string field;
  std::string message;
};

inline std::optional<HyperparamIssue> validate(const Hyperparams& hp) {
  if (!(hp.beta1 >= 0.0) || !(hp.beta1 < 1.0))
    return HyperparamIssue{"beta1", "beta1 must lie in [0, 1)"};
  if (!(hp.beta2 > 0.0) || !(hp.beta2 < 1.0))
    return HyperparamIssue{"beta2", "beta2 must lie in (0, 1)"};
  if (!(hp.beta1 < hp.beta2))
    return HyperparamIssue{"beta1", "beta1 must be strictly below beta2"};
  if (!(hp.C0 > 0.0) || !std::isfinite(hp.C0))
    return HyperparamIssue{"C0", "C0 must be positive and finite"};
  if (!(hp.eps0 > 0.0) || !std::isfinite(hp.eps0))
    return HyperparamIssue{"eps0", "eps0 must be positive and finite"};
  if (hp.T < 1) return HyperparamIssue{"T", "T must be at least 1"};
  if (hp.d < 1) return HyperparamIssue{"d", "d must be at least 1"};
  if (hp.eta != hp.C0 * std::sqrt(1.0 - hp.beta2))
    return HyperparamIssue{"eta", "eta must equal C0 * sqrt(1 - beta2)"};
  if (hp.eps != hp.eps0 * std::sqrt(1.0 - hp.beta2))
    return HyperparamIssue{"eps", "eps must equal eps0 * sqrt(1 - beta2)"};
  return std::nullopt;
}

inline Hyperparams make_hyperparams(double beta1, double beta2, double C0,
                                    double eps0, long T, int d) {
  Hyperparams hp;
  hp.beta1 = beta1;
  hp.beta2 = beta2;
  hp.C0 = C0;
  hp.eps0 = eps0;
  hp.T = T;
  hp.d = d;
  hp.eta = C0 * std::sqrt(1.0 - beta2);
  hp.eps = eps0 * std::sqrt(1.0 - beta2);
  if (auto issue = validate(hp))
    throw InvalidRange(issue->field, issue->message);
  return hp;
}

// eta_s = eta * sqrt(1 - beta2^s) / (1 - beta1^s), the step size with both
// bias corrections folded in. Bounded above by eta / (1 - beta1).
inline double eta_s(const Hyperparams& hp, long s) {
  return hp.eta * std::sqrt(1.0 - std::pow(hp.beta2, double(s))) /
         (1.0 - std::pow(hp.beta1, double(s)));
}

// eps_s = eps * sqrt(1 - beta2^s); increases toward eps.
inline double eps_s(const Hyperparams& hp, long s) {
  return hp.eps * std::sqrt(1.0 - std::pow(hp.beta2, double(s)));
}

// Step size of the variant without second-moment correction:
// eta~_s = eta / (1 - beta1^s).
inline double eta_variant_s(const Hyperparams& hp, long s) {
  return hp.eta / (1.0 - std::pow(hp.beta1, double(s)));
}

enum class Algorithm { adam, variant };

inline const char* name(Algorithm a) {
  return a == Algorithm::adam ? "adam" : "variant";
}

/// Moment estimates plus iterate; s is the index of the next update to run.
struct OptimizerState {
  Vec x;
  Vec x_prev;
  Vec m;
  Vec v;
  long s = 1;
};

inline OptimizerState init_state(const Vec& x1) {
  OptimizerState st;
  st.x = x1;
  st.x_prev = x1;
  st.m.assign(x1.size(), 0.0);
  st.v.assign(x1.size(), 0.0);
  st.s = 1;
  return st;
}

// Debiased moments of step s:  m / (1 - beta1^s),  v / (1 - beta2^s).
inline std::pair<Vec, Vec> bias_corrected(const Vec& m, const Vec& v, long s,
                                          const Hyperparams& hp) {
  const double cm = 1.0 - std::pow(hp.beta1, double(s));
  const double cv = 1.0 - std::pow(hp.beta2, double(s));
  Vec mh(m.size()), vh(v.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    mh[i] = m[i] / cm;
    vh[i] = v[i] / cv;
  }
  return {std::move(mh), std::move(vh)};
}

// Moments held by a post-update state belong to step state.s - 1.
inline std::pair<Vec, Vec> bias_corrected(const OptimizerState& st,
                                          const Hyperparams& hp) {
  if (st.s < 2)
    throw InvalidRange("s", "state holds no completed update to debias");
  return bias_corrected(st.m, st.v, st.s - 1, hp);
}

/// One logged update. x, g, grad, f describe the pre-update point; m, v, b
/// are the post-update moments; eta/eps are the factors actually applied.
struct StepRecord {
  Vec x;
  Vec g;
  Vec grad;
  Vec noise;  // g - grad, stored as the float difference
  Vec m;
  Vec v;
  Vec b;  // sqrt(v) + eps-term of this step
  double eta = 0.0;
  double eps = 0.0;
  double f = 0.0;
};

struct Trajectory {
  Algorithm algorithm = Algorithm::adam;
  Hyperparams hp;
  std::string problem_id;
  std::string noise_id;
  double L = 0.0;
  double f_star = 0.0;
  Vec sigma0;  // declared noise certificate
  Vec sigma1;
  std::vector<StepRecord> steps;
  Vec x_final;
  Vec grad_final;
  double f_final = 0.0;
  bool non_finite = false;
  std::string diagnostic;

  long horizon() const { return long(steps.size()); }
};

// lhs <= rhs up to the harness-wide slack floor.
inline bool leq_tol(double lhs, double rhs, double rel = 1e-9,
                    double abs = 1e-12) {
  return lhs <=
         rhs + std::max(abs, rel * std::max(std::abs(lhs), std::abs(rhs)));
}

inline bool rel_close(double a, double b, double rel, double abs = 1e-300) {
  return std::abs(a - b) <=
         std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

/// One evaluated inequality instance.
struct CheckRow {
  std::string check;
  long s = 0;
  int i = -1;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;

  double slack() const { return rhs - lhs; }
};

/// Aggregate over many instances; keeps the tightest row and a capped list
/// of failures for diagnostics.
struct CheckReport {
  std::string name;
  long checked = 0;
  long violations = 0;
  CheckRow worst;
  std::vector<CheckRow> failures;
  static constexpr std::size_t max_failures = 16;

  explicit CheckReport(std::string n = "") : name(std::move(n)) {
    worst.rhs = std::numeric_limits<double>::infinity();
  }

  void add(long s, int i, double lhs, double rhs) {
    CheckRow row{name, s, i, lhs, rhs, leq_tol(lhs, rhs)};
    ++checked;
    if (!row.ok) {
      ++violations;
      if (failures.size() < max_failures) failures.push_back(row);
    }
    if (checked == 1 || row.slack() < worst.slack()) worst = row;
  }

  void merge(const CheckReport& other) {
    if (other.checked == 0) return;
    checked += other.checked;
    violations += other.violations;
    if (worst.slack() > other.worst.slack() || checked == other.checked)
      worst = other.worst;
    for (const auto& r : other.failures)
      if (failures.size() < max_failures) failures.push_back(r);
  }

  bool pass() const { return violations == 0; }
};

}  // namespace adamhp
