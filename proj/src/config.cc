#include "ncs/config.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace ncs {

namespace {

std::string JoinLines(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += s + "\n";
  return out;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string MatrixText(const MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += r == 0 ? "[" : ", [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c == 0 ? "" : ", ") + Num(m(r, c));
    out += "]";
  }
  return out + "]";
}

template <typename T>
std::string ListText(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i == 0 ? "" : ", ") + f(v[i]);
  return out + "]";
}

class Parser {
 public:
  explicit Parser(std::map<std::string, std::pair<int, std::string>> entries)
      : entries_(std::move(entries)) {}

  std::vector<std::string>& errors() { return errors_; }

  bool Has(const std::string& key) const { return entries_.count(key) != 0; }

  void Matrix(const std::string& key, MatrixXd& out, bool required) {
    auto it = Find(key, required);
    if (it == entries_.end()) return;
    try {
      const auto j = nlohmann::json::parse(it->second.second);
      if (!j.is_array() || j.empty()) throw std::runtime_error("expected a nested list");
      const std::size_t rows = j.size();
      if (!j[0].is_array()) throw std::runtime_error("expected a nested list");
      const std::size_t cols = j[0].size();
      MatrixXd m(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
          throw std::runtime_error("rows have different lengths");
        }
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
      }
      out = m;
    } catch (const std::exception& e) {
      Error(it, std::string("malformed matrix (") + e.what() + ")");
    }
  }

  void Double(const std::string& key, double& out) {
    auto it = Find(key, false);
    if (it == entries_.end()) return;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second.second, &pos);
      if (pos != it->second.second.size()) throw std::invalid_argument("trailing text");
      out = v;
    } catch (const std::exception&) {
      Error(it, "expected a number");
    }
  }

  void Int(const std::string& key, int& out) {
    double v = out;
    const std::size_t before = errors_.size();
    Double(key, v);
    if (errors_.size() != before) return;
    if (Has(key) && (v != std::floor(v) || std::abs(v) > 1e9)) {
      Error(entries_.find(key), "expected an integer");
      return;
    }
    out = static_cast<int>(v);
  }

  void Uint64(const std::string& key, std::uint64_t& out) {
    auto it = Find(key, false);
    if (it == entries_.end()) return;
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(it->second.second, &pos);
      if (pos != it->second.second.size() || it->second.second[0] == '-') {
        throw std::invalid_argument("bad");
      }
      out = v;
    } catch (const std::exception&) {
      Error(it, "expected a non-negative integer");
    }
  }

  void String(const std::string& key, std::string& out) {
    auto it = Find(key, false);
    if (it != entries_.end()) out = it->second.second;
  }

  void DoubleList(const std::string& key, std::vector<double>& out) {
    auto it = Find(key, false);
    if (it == entries_.end()) return;
    try {
      out = nlohmann::json::parse(it->second.second).get<std::vector<double>>();
    } catch (const std::exception&) {
      Error(it, "expected a list of numbers");
    }
  }

  void StringList(const std::string& key, std::vector<std::string>& out) {
    auto it = Find(key, false);
    if (it == entries_.end()) return;
    std::vector<std::string> items;
    std::stringstream ss(it->second.second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = Trim(item);
      if (!item.empty()) items.push_back(item);
    }
    out = items;
  }

  void Fail(const std::string& message) { errors_.push_back(message); }

  void ReportUnknown() {
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (!used_.count(it->first)) Error(it, "unknown key");
    }
  }

 private:
  using Iter = std::map<std::string, std::pair<int, std::string>>::const_iterator;

  Iter Find(const std::string& key, bool required) {
    used_[key] = true;
    auto it = entries_.find(key);
    if (it == entries_.end() && required) errors_.push_back(key + ": missing required field");
    return it;
  }

  void Error(Iter it, const std::string& message) {
    errors_.push_back("line " + std::to_string(it->second.first) + ": " + it->first + ": " +
                      message);
  }

  std::map<std::string, std::pair<int, std::string>> entries_;
  std::map<std::string, bool> used_;
  std::vector<std::string> errors_;
};

bool Finite(const MatrixXd& m) { return m.size() > 0 && AllFinite(m); }

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : DomainError("invalid configuration:\n" + JoinLines(violations)),
      violations_(std::move(violations)) {}

ExperimentConfig ParseConfigText(const std::string& text) {
  std::map<std::string, std::pair<int, std::string>> entries;
  std::vector<std::string> early;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      early.push_back("line " + std::to_string(number) + ": expected 'key = value'");
      continue;
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      early.push_back("line " + std::to_string(number) + ": empty key or value");
      continue;
    }
    if (entries.count(key)) {
      early.push_back("line " + std::to_string(number) + ": " + key + ": duplicate key");
      continue;
    }
    entries[key] = {number, value};
  }

  ExperimentConfig c;
  Parser p(std::move(entries));
  p.errors() = early;
  p.Matrix("A", c.A, true);
  p.Matrix("B", c.B, true);
  p.Matrix("W", c.W, true);
  const bool has_psi = p.Has("Psi");
  p.Matrix("Psi", c.Psi, false);
  p.Matrix("P", c.P, false);
  p.Matrix("R", c.R, false);
  std::string convention = "standard";
  p.String("gain_convention", convention);
  std::string coefficient = "closed_loop";
  p.String("range_coefficient", coefficient);
  std::string accounting = "realized";
  p.String("energy_accounting", accounting);
  p.Double("eps", c.eps);
  p.Double("M", c.M);
  p.Int("n_c", c.n_c);
  p.Int("n_s", c.n_s);
  p.String("arrival", c.arrival);
  p.Double("mean_alpha", c.mean_alpha);
  p.Double("theta", c.theta);
  p.Double("initial_energy_fraction", c.initial_energy_fraction);
  p.Double("tau", c.tau);
  p.Int("paths", c.paths);
  p.Int("slots", c.slots);
  p.Uint64("seed", c.seed);
  p.Double("divergence_guard", c.divergence_guard);
  p.String("policy", c.policy);
  p.Int("baseline_period", c.baseline_period);
  p.String("sweep_axis", c.sweep_axis);
  p.DoubleList("sweep_values", c.sweep_values);
  p.StringList("sweep_policies", c.sweep_policies);
  p.Int("pitilde_draws", c.pitilde_draws);
  p.Int("grid_points", c.grid_points);
  p.Double("eta_extra_factor", c.eta_extra_factor);
  p.Double("region_h1", c.region_h1);
  p.Double("region_sigma1", c.region_sigma1);
  p.Double("region_h2_max", c.region_h2_max);
  p.Double("region_sigma2_max", c.region_sigma2_max);
  p.Int("region_grid", c.region_grid);
  p.DoubleList("region_energies", c.region_energies);
  p.ReportUnknown();

  if (convention == "standard") {
    c.gain_convention = GainConvention::kStandard;
  } else if (convention == "literal") {
    c.gain_convention = GainConvention::kLiteral;
  } else {
    p.Fail("gain_convention: must be 'standard' or 'literal'");
  }
  if (coefficient == "closed_loop") {
    c.range_coefficient = RangeCoefficient::kClosedLoopGain;
  } else if (coefficient == "control") {
    c.range_coefficient = RangeCoefficient::kControlGain;
  } else {
    p.Fail("range_coefficient: must be 'closed_loop' or 'control'");
  }

  if (accounting == "realized") {
    c.energy_accounting = EnergyAccounting::kRealized;
  } else if (accounting == "reserved") {
    c.energy_accounting = EnergyAccounting::kReserved;
  } else {
    p.Fail("energy_accounting: must be 'realized' or 'reserved'");
  }

  // Semantic checks; each one reports independently.
  const Eigen::Index k = c.A.rows();
  if (c.A.size() > 0 && (c.A.cols() != k)) p.Fail("A: must be square, got " +
      std::to_string(c.A.rows()) + "x" + std::to_string(c.A.cols()));
  if (c.A.size() > 0 && !Finite(c.A)) p.Fail("A: non-finite entry");
  if (c.B.size() > 0 && c.A.size() > 0 && c.B.rows() != k) p.Fail("B: must have as many rows as A");
  if (c.W.size() > 0 && c.A.size() > 0 && (c.W.rows() != k || c.W.cols() != k)) {
    p.Fail("W: must match the dimension of A");
  }
  if (has_psi) {
    if (c.Psi.size() > 0 && c.B.size() > 0 && c.A.size() > 0 &&
        (c.Psi.rows() != c.B.cols() || c.Psi.cols() != c.A.cols())) {
      p.Fail("Psi: must be D x K (columns of B by dimension of A)");
    }
  } else if (c.P.size() == 0 || c.R.size() == 0) {
    p.Fail("Psi: missing; give Psi or both P and R");
  } else if (c.A.size() > 0 && c.B.size() > 0 &&
             (c.P.rows() != k || c.P.cols() != k || c.R.rows() != c.B.cols() ||
              c.R.cols() != c.B.cols())) {
    p.Fail("P, R: dimensions must be K x K and D x D");
  }
  if (!(c.eps > 0.0 && c.eps < 1.0)) p.Fail("eps: must lie in (0, 1), got " + Num(c.eps));
  if (!(c.M > 0.0)) p.Fail("M: must be > 0");
  if (c.n_c < 1 || c.n_s < 1) p.Fail("n_c, n_s: must be >= 1");
  if (c.A.size() > 0 && k > std::min(c.n_c, c.n_s)) {
    p.Fail("K: state dimension " + std::to_string(k) + " exceeds min(n_c, n_s)");
  }
  if (c.arrival != "poisson" && c.arrival != "deterministic") {
    p.Fail("arrival: must be 'poisson' or 'deterministic'");
  }
  if (!(c.mean_alpha > 0.0)) p.Fail("mean_alpha: must be > 0");
  if (!(c.theta > 0.0)) p.Fail("theta: must be > 0");
  if (!(c.initial_energy_fraction >= 0.0 && c.initial_energy_fraction <= 1.0)) {
    p.Fail("initial_energy_fraction: must lie in [0, 1]");
  }
  if (!(c.tau > 0.0)) p.Fail("tau: must be > 0");
  if (c.paths < 1) p.Fail("paths: must be >= 1");
  if (c.slots < 1) p.Fail("slots: must be >= 1");
  if (!(c.divergence_guard > 0.0)) p.Fail("divergence_guard: must be > 0");
  try {
    ParsePolicyKind(c.policy);
  } catch (const DomainError& e) {
    p.Fail(std::string("policy: ") + e.what());
  }
  for (const auto& name : c.sweep_policies) {
    try {
      ParsePolicyKind(name);
    } catch (const DomainError& e) {
      p.Fail(std::string("sweep_policies: ") + e.what());
    }
  }
  if (c.baseline_period < 1) p.Fail("baseline_period: must be >= 1");
  if (c.sweep_axis != "theta" && c.sweep_axis != "mean_alpha") {
    p.Fail("sweep_axis: must be 'theta' or 'mean_alpha'");
  }
  for (std::size_t i = 1; i < c.sweep_values.size(); ++i) {
    if (c.sweep_values[i] < c.sweep_values[i - 1]) {
      p.Fail("sweep_values: must be ascending");
      break;
    }
  }
  if (c.pitilde_draws < 1) p.Fail("pitilde_draws: must be >= 1");
  if (c.grid_points < 1) p.Fail("grid_points: must be >= 1");
  if (c.region_grid < 1) p.Fail("region_grid: must be >= 1");

  if (!p.errors().empty()) throw ConfigError(p.errors());
  return c;
}

ExperimentConfig ParseConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open"});
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfigText(ss.str());
}

PlantModel ExperimentConfig::BuildPlant() const {
  MatrixXd psi = Psi;
  if (psi.size() == 0) psi = DesignGainCe(A, B, P, R, gain_convention);
  return PlantModel(A, B, W, psi);
}

ArrivalModel ExperimentConfig::BuildArrivals() const {
  return arrival == "deterministic" ? ArrivalModel::Deterministic(mean_alpha)
                                    : ArrivalModel::Poisson(mean_alpha);
}

SystemConfig ExperimentConfig::BuildSystem() const {
  PlantModel model = BuildPlant();
  LimiterParams limiter = MakeLimiterParams(model, M, eps, range_coefficient);
  SystemConfig cfg{std::move(model), limiter, n_c, n_s, BuildArrivals(), theta, tau,
                   initial_energy_fraction, divergence_guard, energy_accounting};
  cfg.Validate();
  return cfg;
}

RegionScanSetup ExperimentConfig::BuildRegionSetup() const {
  PlantModel model = BuildPlant();
  if (model.state_dim() != 2) throw DomainError("region scan requires a two-state plant");
  LimiterParams limiter = MakeLimiterParams(model, M, eps, range_coefficient);
  return RegionScanSetup{std::move(model), limiter, theta, tau, region_h1, region_sigma1,
                         region_h2_max, region_sigma2_max, region_grid};
}

StabilityInputs ExperimentConfig::BuildStabilityInputs(double inverse_alpha) const {
  StabilityInputs in;
  in.inverse_alpha = inverse_alpha;
  in.theta = theta;
  in.tau = tau;
  in.grid_points = grid_points;
  in.eta_extra_factor = eta_extra_factor;
  return in;
}

PolicySpec ExperimentConfig::BuildPolicy(const std::string& name) const {
  PolicySpec spec;
  spec.kind = ParsePolicyKind(name);
  spec.period_slots = baseline_period;
  spec.mean_alpha = mean_alpha;
  return spec;
}

std::string ExperimentConfig::ToText() const {
  std::ostringstream os;
  os << "A = " << MatrixText(A) << "\n";
  os << "B = " << MatrixText(B) << "\n";
  os << "W = " << MatrixText(W) << "\n";
  if (Psi.size() > 0) os << "Psi = " << MatrixText(Psi) << "\n";
  if (P.size() > 0) os << "P = " << MatrixText(P) << "\n";
  if (R.size() > 0) os << "R = " << MatrixText(R) << "\n";
  os << "gain_convention = "
     << (gain_convention == GainConvention::kStandard ? "standard" : "literal") << "\n";
  os << "eps = " << Num(eps) << "\n";
  os << "M = " << Num(M) << "\n";
  os << "range_coefficient = "
     << (range_coefficient == RangeCoefficient::kClosedLoopGain ? "closed_loop" : "control")
     << "\n";
  os << "n_c = " << n_c << "\n";
  os << "n_s = " << n_s << "\n";
  os << "arrival = " << arrival << "\n";
  os << "mean_alpha = " << Num(mean_alpha) << "\n";
  os << "theta = " << Num(theta) << "\n";
  os << "initial_energy_fraction = " << Num(initial_energy_fraction) << "\n";
  os << "energy_accounting = "
     << (energy_accounting == EnergyAccounting::kRealized ? "realized" : "reserved") << "\n";
  os << "tau = " << Num(tau) << "\n";
  os << "paths = " << paths << "\n";
  os << "slots = " << slots << "\n";
  os << "seed = " << seed << "\n";
  os << "divergence_guard = " << Num(divergence_guard) << "\n";
  os << "policy = " << policy << "\n";
  os << "baseline_period = " << baseline_period << "\n";
  os << "sweep_axis = " << sweep_axis << "\n";
  os << "sweep_values = " << ListText<double>(sweep_values, Num) << "\n";
  if (!sweep_policies.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < sweep_policies.size(); ++i) {
      joined += (i == 0 ? "" : ", ") + sweep_policies[i];
    }
    os << "sweep_policies = " << joined << "\n";
  }
  os << "pitilde_draws = " << pitilde_draws << "\n";
  os << "grid_points = " << grid_points << "\n";
  os << "eta_extra_factor = " << Num(eta_extra_factor) << "\n";
  os << "region_h1 = " << Num(region_h1) << "\n";
  os << "region_sigma1 = " << Num(region_sigma1) << "\n";
  os << "region_h2_max = " << Num(region_h2_max) << "\n";
  os << "region_sigma2_max = " << Num(region_sigma2_max) << "\n";
  os << "region_grid = " << region_grid << "\n";
  os << "region_energies = " << ListText<double>(region_energies, Num) << "\n";
  return os.str();
}

std::string ExperimentConfig::Hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : ToText()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ncs
