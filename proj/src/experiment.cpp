#include "suprec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "suprec/analysis.hpp"
#include "suprec/methods.hpp"
#include "suprec/parallel.hpp"
#include "suprec/rng.hpp"

namespace suprec {

const char* const kVersion = "0.1.0";

using nlohmann::json;

// ---------------------------------------------------------------- names

namespace {

template <class E>
using NameTable = std::vector<std::pair<E, const char*>>;

const NameTable<ExperimentKind> kExperimentNames{
    {ExperimentKind::clip_sweep, "clip_sweep"},
    {ExperimentKind::coherent_vs_noncoherent, "coherent_vs_noncoherent"},
    {ExperimentKind::phase_transition, "phase_transition"},
    {ExperimentKind::mismatch_audit, "mismatch_audit"},
    {ExperimentKind::width_study, "width_study"},
};
const NameTable<RadiusRule> kRadiusNames{{RadiusRule::nominal, "nominal"}, {RadiusRule::oracle, "oracle"}};
const NameTable<WeightRule> kWeightNames{
    {WeightRule::ones, "ones"}, {WeightRule::identity, "identity"}, {WeightRule::sign_mu, "sign_mu"}};
const NameTable<SnrReference> kSnrNames{{SnrReference::aggregate, "aggregate"},
                                        {SnrReference::per_node, "per_node"}};

template <class E>
const char* name_of(const NameTable<E>& table, E value) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "";
}

template <class E>
E value_of(const NameTable<E>& table, const std::string& key, const std::string& name) {
  std::string choices;
  for (const auto& [v, n] : table) {
    if (name == n) return v;
    choices += choices.empty() ? n : std::string(", ") + n;
  }
  throw config_error("'" + key + "': unknown value '" + name + "' (expected one of " + choices + ")");
}

}  // namespace

std::string to_string(ExperimentKind kind) { return name_of(kExperimentNames, kind); }

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  if (n < 1) throw config_error("'n' must be >= 1");
  if (s < 1 || s > n) throw config_error("'s' must lie in [1, n]");
  if (M_list.empty()) throw config_error("M_list must be nonempty");
  if (m_list.empty()) throw config_error("m_list must be nonempty");
  if (A_list.empty()) throw config_error("A_list must be nonempty");
  for (Index v : M_list)
    if (v < 1) throw config_error("'M_list' entries must be >= 1");
  for (Index v : m_list)
    if (v < 1) throw config_error("'m_list' entries must be >= 1");
  for (double v : A_list)
    if (!(v > 0.0) || !std::isfinite(v)) throw config_error("'A_list' entries must be > 0");
  if (snr_db && !std::isfinite(*snr_db)) throw config_error("'snr_db' must be finite");
  if (trials < 1) throw config_error("'trials' must be >= 1");
  if (!(radius_scale > 0.0) || !std::isfinite(radius_scale))
    throw config_error("'radius_scale' must be > 0");
  if (mc_trials < 1000) throw config_error("'mc_trials' must be >= 1000");
  if (max_iters < 1) throw config_error("'max_iters' must be >= 1");
}

namespace {

const std::set<std::string> kKnownKeys{
    "experiment", "n",           "s",           "M_list",       "m_list",       "A_list",
    "snr_db",     "snr_reference", "trials",    "seed",         "radius_rule",  "radius_scale",
    "weight_rule", "distribution", "mc_trials", "max_iters",    "output_path"};

json parse_strict(const std::string& text) {
  // One key set per open object; a repeated key in the same object is an error.
  std::vector<std::set<std::string>> seen;
  auto callback = [&](int /*depth*/, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        seen.emplace_back();
        break;
      case json::parse_event_t::object_end:
        seen.pop_back();
        break;
      case json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!seen.back().insert(key).second) throw config_error("duplicate key '" + key + "'");
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text, callback);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("malformed config: ") + e.what());
  }
}

Index get_count(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw config_error("'" + key + "' must be an integer");
  return j.get<Index>();
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw config_error("'" + key + "' must be a number");
  return j.get<double>();
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) throw config_error("'" + key + "' must be a string");
  return j.get<std::string>();
}

template <class T, class Get>
std::vector<T> get_list(const json& j, const std::string& key, Get&& get) {
  if (!j.is_array()) throw config_error("'" + key + "' must be a list");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(get(v, key));
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  const json doc = parse_strict(text);
  if (!doc.is_object()) throw config_error("config must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!kKnownKeys.count(key)) throw config_error("unknown key '" + key + "'");
  for (const char* key : {"experiment", "n", "s"})
    if (!doc.contains(key)) throw config_error(std::string("missing required key '") + key + "'");

  ExperimentConfig cfg;
  cfg.experiment = value_of(kExperimentNames, "experiment", get_string(doc["experiment"], "experiment"));
  cfg.n = get_count(doc["n"], "n");
  cfg.s = get_count(doc["s"], "s");
  if (cfg.experiment == ExperimentKind::coherent_vs_noncoherent) {
    cfg.snr_db = -11.0;
    cfg.snr_reference = SnrReference::per_node;
  }
  if (doc.contains("M_list")) cfg.M_list = get_list<Index>(doc["M_list"], "M_list", get_count);
  if (doc.contains("m_list")) cfg.m_list = get_list<Index>(doc["m_list"], "m_list", get_count);
  if (doc.contains("A_list")) cfg.A_list = get_list<double>(doc["A_list"], "A_list", get_number);
  if (doc.contains("snr_db")) {
    if (doc["snr_db"].is_null()) {
      cfg.snr_db.reset();
    } else {
      cfg.snr_db = get_number(doc["snr_db"], "snr_db");
    }
  }
  if (doc.contains("snr_reference"))
    cfg.snr_reference = value_of(kSnrNames, "snr_reference", get_string(doc["snr_reference"], "snr_reference"));
  if (doc.contains("trials")) cfg.trials = get_count(doc["trials"], "trials");
  if (doc.contains("seed")) {
    const auto& v = doc["seed"];
    if (!v.is_number_unsigned()) throw config_error("'seed' must be a non-negative integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  if (doc.contains("radius_rule"))
    cfg.radius_rule = value_of(kRadiusNames, "radius_rule", get_string(doc["radius_rule"], "radius_rule"));
  if (doc.contains("radius_scale")) cfg.radius_scale = get_number(doc["radius_scale"], "radius_scale");
  if (doc.contains("weight_rule"))
    cfg.weight_rule = value_of(kWeightNames, "weight_rule", get_string(doc["weight_rule"], "weight_rule"));
  if (doc.contains("distribution")) {
    try {
      cfg.distribution = parse_family(get_string(doc["distribution"], "distribution"));
    } catch (const config_error&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("'distribution': ") + e.what());
    }
  }
  if (doc.contains("mc_trials")) cfg.mc_trials = get_count(doc["mc_trials"], "mc_trials");
  if (doc.contains("max_iters")) {
    const Index v = get_count(doc["max_iters"], "max_iters");
    if (v < 1 || v > 100000000) throw config_error("'max_iters' must lie in [1, 1e8]");
    cfg.max_iters = static_cast<int>(v);
  }
  if (doc.contains("output_path")) cfg.output_path = get_string(doc["output_path"], "output_path");
  cfg.validate();
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.experiment);
  j["n"] = cfg.n;
  j["s"] = cfg.s;
  j["M_list"] = cfg.M_list;
  j["m_list"] = cfg.m_list;
  j["A_list"] = cfg.A_list;
  j["snr_db"] = cfg.snr_db ? json(*cfg.snr_db) : json(nullptr);
  j["snr_reference"] = name_of(kSnrNames, cfg.snr_reference);
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["radius_rule"] = name_of(kRadiusNames, cfg.radius_rule);
  j["radius_scale"] = cfg.radius_scale;
  j["weight_rule"] = name_of(kWeightNames, cfg.weight_rule);
  j["distribution"] = to_string(cfg.distribution);
  j["mc_trials"] = cfg.mc_trials;
  j["max_iters"] = cfg.max_iters;
  j["output_path"] = cfg.output_path;
  return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- results

const ResultRow& ResultTable::find(const std::string& metric, Index M, Index m, double A) const {
  for (const auto& r : rows)
    if (r.metric_name == metric && r.M == M && r.m == m && r.A == A) return r;
  throw std::out_of_range("ResultTable: no row for metric '" + metric + "'");
}

std::string to_csv(const ResultTable& table) {
  std::string out = "experiment,n,s,M,m,A,snr_db,metric_name,mean,median,std,trials,seed\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  for (const auto& r : table.rows) {
    out += r.experiment + ',' + std::to_string(r.n) + ',' + std::to_string(r.s) + ',' +
           std::to_string(r.M) + ',' + std::to_string(r.m) + ',' + num(r.A) + ',' +
           (r.snr_db ? num(*r.snr_db) : std::string("none")) + ',' + r.metric_name + ',' +
           num(r.mean) + ',' + num(r.median) + ',' + num(r.std) + ',' + std::to_string(r.trials) +
           ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------- experiments

namespace {

struct Summary {
  double mean = 0.0, median = 0.0, std = 0.0;
};

Summary summarize(std::vector<double> v) {
  Summary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  s.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return s;
}

// Metric name -> per-trial values, in the order metrics were declared.
class TrialTable {
 public:
  TrialTable(std::vector<std::string> names, Index trials) : names_(std::move(names)) {
    values_.assign(names_.size(), std::vector<double>(static_cast<std::size_t>(trials), 0.0));
  }
  void set(std::size_t metric, Index trial, double v) {
    values_[metric][static_cast<std::size_t>(trial)] = v;
  }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& values(std::size_t metric) const { return values_[metric]; }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> values_;
};

struct Point {
  Index M, m;
  double A;
};

std::uint64_t source_seed(std::uint64_t seed, Index t) {
  return derive_seed(seed, static_cast<std::uint64_t>(t), 0);
}
// Same measurement vectors for every A at a given (M, m): common random numbers.
std::uint64_t ensemble_seed(std::uint64_t seed, Index t, Index M, Index m) {
  return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(t), 2), static_cast<std::uint64_t>(M),
                     static_cast<std::uint64_t>(m));
}

// Channel coefficients h_j ~ N(0, 1); h_j does not depend on M.
VectorXd channel(std::uint64_t seed, Index t, Index M) {
  VectorXd h(M);
  for (Index j = 0; j < M; ++j) {
    Stream rng(derive_seed(seed, static_cast<std::uint64_t>(t), 1), StreamDomain::channel,
               static_cast<std::uint32_t>(j));
    h[j] = rng.normal();
  }
  return h;
}

ObservationSpec observation_spec(const ExperimentConfig& cfg, const Point& p, Index t,
                                 std::vector<Nonlinearity> fs) {
  ObservationSpec spec;
  spec.node_count = p.M;
  spec.sample_count = p.m;
  spec.nonlinearities = std::move(fs);
  spec.distribution.family = cfg.distribution;
  spec.seed = ensemble_seed(cfg.seed, t, p.M, p.m);
  if (cfg.snr_db) {
    spec.noise = TargetSnr{*cfg.snr_db, cfg.snr_reference};
  } else {
    spec.noise = NoiseScale{0.0};
  }
  return spec;
}

SolverConfig solver_config(const ExperimentConfig& cfg) {
  SolverConfig sc;
  sc.max_iters = cfg.max_iters;
  return sc;
}

MatrixXd weight_entries(WeightRule rule, const VectorXd& mu) {
  switch (rule) {
    case WeightRule::ones:
      return MatrixXd::Ones(mu.size(), 1);
    case WeightRule::identity:
      return MatrixXd::Identity(mu.size(), mu.size());
    case WeightRule::sign_mu:
      return WeightMatrix::signs(mu).entries();
  }
  return MatrixXd::Ones(mu.size(), 1);
}

using TrialFn = std::function<void(const Point&, Index, TrialTable&)>;

void clip_sweep_trial(const ExperimentConfig& cfg, const Point& p, Index t, TrialTable& out) {
  const auto x0 = generate_sparse_source(cfg.n, cfg.s, source_seed(cfg.seed, t));
  const auto f = Nonlinearity::clip(p.A);
  const double mu_bar = scaling_parameter(f);
  const auto spec = observation_spec(cfg, p, t, std::vector<Nonlinearity>(static_cast<std::size_t>(p.M), f));
  const auto ens = generate_ensemble(x0, spec);
  const double base = cfg.radius_rule == RadiusRule::nominal ? std::sqrt(static_cast<double>(cfg.s))
                                                           : x0.entries.lpNorm<1>();
  const auto res = direct_method(ens, cfg.radius_scale * mu_bar * base, solver_config(cfg));
  const VectorXd xhat = res.estimate_matrix.col(0);
  out.set(0, t, (xhat - mu_bar * x0.entries).squaredNorm());
  out.set(1, t, (xhat / mu_bar - x0.entries).squaredNorm());
}

void coherent_trial(const ExperimentConfig& cfg, const Point& p, Index t, TrialTable& out) {
  const auto x0 = generate_sparse_source(cfg.n, cfg.s, source_seed(cfg.seed, t));
  const VectorXd h = channel(cfg.seed, t, p.M);
  const auto clip = Nonlinearity::clip(p.A);
  const double mu_clip = scaling_parameter(clip);
  const double sqrt_s = std::sqrt(static_cast<double>(cfg.s));
  const double l1 = x0.entries.lpNorm<1>();
  const auto sc = solver_config(cfg);

  // coherent: f_j = |h_j| clip_A, direct method
  std::vector<Nonlinearity> coherent, noncoherent;
  for (Index j = 0; j < p.M; ++j) {
    coherent.push_back(Nonlinearity::compose(Nonlinearity::scale(std::abs(h[j])), clip));
    noncoherent.push_back(Nonlinearity::compose(Nonlinearity::scale(h[j]), clip));
  }
  const double mu_bar = h.cwiseAbs().mean() * mu_clip;
  {
    const auto ens = generate_ensemble(x0, observation_spec(cfg, p, t, coherent));
    const double r = mu_bar * (cfg.radius_rule == RadiusRule::nominal ? sqrt_s : l1);
    const auto res = direct_method(ens, cfg.radius_scale * r, sc);
    const VectorXd xhat = res.estimate_matrix.col(0);
    out.set(0, t, (xhat - mu_bar * x0.entries).squaredNorm());
    out.set(1, t, (xhat / mu_bar - x0.entries).squaredNorm());
  }
  // non-coherent: f_j = h_j clip_A, lifting
  {
    const VectorXd mu = mu_clip * h;
    const auto ens = generate_ensemble(x0, observation_spec(cfg, p, t, noncoherent));
    const double r = cfg.radius_rule == RadiusRule::nominal
                         ? std::sqrt(static_cast<double>(p.M)) * sqrt_s
                         : mu.norm() * l1;
    const auto res = lifting_method(ens, cfg.radius_scale * r, sc);
    const MatrixXd target = x0.entries * mu.transpose();
    out.set(2, t, (res.estimate_matrix - target).squaredNorm() / static_cast<double>(p.M));
    double source_err = 2.0;  // zero estimate: distance to the unit sphere pair
    if (res.extracted_source) {
      const VectorXd& xs = *res.extracted_source;
      source_err = std::min((xs - x0.entries).squaredNorm(), (xs + x0.entries).squaredNorm());
    }
    out.set(3, t, source_err);
  }
}

void phase_transition_trial(const ExperimentConfig& cfg, const Point& p, Index t, TrialTable& out) {
  const auto x0 = generate_sparse_source(cfg.n, cfg.s, source_seed(cfg.seed, t));
  const VectorXd h = channel(cfg.seed, t, p.M);
  const double l1 = x0.entries.lpNorm<1>();
  const auto sc = solver_config(cfg);
  std::vector<Nonlinearity> coherent, noncoherent;
  for (Index j = 0; j < p.M; ++j) {
    coherent.push_back(Nonlinearity::scale(std::abs(h[j])));
    noncoherent.push_back(Nonlinearity::scale(h[j]));
  }
  {
    const double mu_bar = h.cwiseAbs().mean();
    const auto ens = generate_ensemble(x0, observation_spec(cfg, p, t, coherent));
    const auto res = direct_method(ens, cfg.radius_scale * mu_bar * l1, sc);
    const double err = (res.estimate_matrix.col(0) / mu_bar - x0.entries).norm();
    out.set(0, t, err);
    out.set(1, t, err <= 1e-3 ? 1.0 : 0.0);
  }
  {
    const MatrixXd target = x0.entries * h.transpose();
    const auto ens = generate_ensemble(x0, observation_spec(cfg, p, t, noncoherent));
    const auto res = lifting_method(ens, cfg.radius_scale * h.norm() * l1, sc);
    const double err = (res.estimate_matrix - target).norm() / target.norm();
    out.set(2, t, err);
    out.set(3, t, err <= 1e-3 ? 1.0 : 0.0);
  }
}

void mismatch_audit_trial(const ExperimentConfig& cfg, const Point& p, Index t, TrialTable& out) {
  const auto x0 = generate_sparse_source(cfg.n, cfg.s, source_seed(cfg.seed, t));
  const VectorXd h = channel(cfg.seed, t, p.M);
  const auto clip = Nonlinearity::clip(p.A);
  std::vector<Nonlinearity> fs;
  for (Index j = 0; j < p.M; ++j) fs.push_back(Nonlinearity::compose(Nonlinearity::scale(h[j]), clip));
  const VectorXd mu = scaling_parameter(clip) * h;
  const auto ens = generate_ensemble(x0, observation_spec(cfg, p, t, fs));

  const MatrixXd direct_x = mu.mean() * x0.entries;
  const MatrixXd lifting_x = x0.entries * mu.transpose();
  const auto rd = empirical_mismatch_covariance(direct_x, ens, CombinedDesign::direct());
  const auto rl = empirical_mismatch_covariance(lifting_x, ens, CombinedDesign::lifting());
  auto z = [](const MismatchCovarianceEstimate& e) {
    return e.rho_squared_std_error > 0.0 ? e.rho_squared / e.rho_squared_std_error : 0.0;
  };
  out.set(0, t, rd.rho_squared);
  out.set(1, t, z(rd));
  out.set(2, t, rl.rho_squared);
  out.set(3, t, z(rl));
  out.set(4, t, empirical_mismatch_deviation(direct_x, ens, CombinedDesign::direct()));
  out.set(5, t, empirical_mismatch_deviation(lifting_x, ens, CombinedDesign::lifting()));

  const WeightMatrix w(weight_entries(cfg.weight_rule, mu));
  DistributionSpec dist;
  dist.family = cfg.distribution;
  const auto profile = mismatch_profile(fs, dist, x0.entries, w, cfg.mc_trials,
                                        derive_seed(cfg.seed, static_cast<std::uint64_t>(t), 3));
  out.set(6, t, profile.sigma_dir);
  out.set(7, t, profile.sigma_lift);
  out.set(8, t, profile.sigma_hyb);
  out.set(9, t, profile.rho_hyb);
}

void width_trial(const ExperimentConfig& cfg, const Point& p, Index t, TrialTable& out) {
  const auto x0 = generate_sparse_source(cfg.n, cfg.s, source_seed(cfg.seed, 0));
  Stream rng(cfg.seed, StreamDomain::monte_carlo, static_cast<std::uint32_t>(t),
             static_cast<std::uint32_t>(p.M));
  MatrixXd g(cfg.n, p.M);
  for (Index k = 0; k < g.size(); ++k) g.data()[k] = rng.normal();
  out.set(0, t, conic_distance_sq_l1(x0.entries, g.col(0)));
  out.set(1, t, conic_distance_sq_l12(x0.entries, VectorXd::Ones(p.M), g));
  out.set(2, t, std::sqrt(static_cast<double>(cfg.s)) * g.col(0).cwiseAbs().maxCoeff());
}

struct ExperimentPlan {
  std::vector<std::string> metrics;
  TrialFn trial;
};

ExperimentPlan plan_for(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::clip_sweep:
      return {{"mse_raw", "mse_rescaled"},
              [&cfg](const Point& p, Index t, TrialTable& o) { clip_sweep_trial(cfg, p, t, o); }};
    case ExperimentKind::coherent_vs_noncoherent:
      return {{"coherent_mse_raw", "coherent_mse_rescaled", "noncoherent_mse_matrix",
               "noncoherent_mse_source"},
              [&cfg](const Point& p, Index t, TrialTable& o) { coherent_trial(cfg, p, t, o); }};
    case ExperimentKind::phase_transition:
      return {{"direct_error", "direct_success", "lifting_rel_error", "lifting_success"},
              [&cfg](const Point& p, Index t, TrialTable& o) { phase_transition_trial(cfg, p, t, o); }};
    case ExperimentKind::mismatch_audit:
      return {{"rho_sq_direct", "rho_sq_direct_z", "rho_sq_lifting", "rho_sq_lifting_z",
               "sigma_emp_direct", "sigma_emp_lifting", "sigma_dir", "sigma_lift", "sigma_hyb",
               "rho_hyb"},
              [&cfg](const Point& p, Index t, TrialTable& o) { mismatch_audit_trial(cfg, p, t, o); }};
    case ExperimentKind::width_study:
      return {{"conic_l1_width_sq", "conic_l12_width_sq", "global_l1_width"},
              [&cfg](const Point& p, Index t, TrialTable& o) { width_trial(cfg, p, t, o); }};
  }
  throw std::logic_error("unhandled experiment");
}

// Formula rows appended after the per-trial metrics.
std::vector<std::pair<std::string, double>> formula_rows(const ExperimentConfig& cfg, const Point& p) {
  if (cfg.experiment != ExperimentKind::phase_transition && cfg.experiment != ExperimentKind::width_study)
    return {};
  SampleComplexityQuery q;
  q.s = cfg.s;
  q.n = cfg.n;
  q.nodes = p.M;
  q.rule = SampleComplexityQuery::Rule::direct;
  const double direct = sample_complexity(q);
  q.rule = SampleComplexityQuery::Rule::lifting;
  const double lifting = sample_complexity(q);
  return {{"predicted_m_direct", direct}, {"predicted_m_lifting", lifting}};
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto plan = plan_for(cfg);
  const bool widths = cfg.experiment == ExperimentKind::width_study;
  // Width samples do not depend on m or A.
  const std::vector<Index> m_values = widths ? std::vector<Index>{cfg.m_list.front()} : cfg.m_list;
  const std::vector<double> a_values = widths ? std::vector<double>{cfg.A_list.front()} : cfg.A_list;
  const Index trials = widths ? cfg.mc_trials : cfg.trials;

  ResultTable table;
  for (Index M : cfg.M_list) {
    for (Index m : m_values) {
      for (double A : a_values) {
        const Point p{M, m, A};
        TrialTable values(plan.metrics, trials);
        parallel_for(static_cast<std::size_t>(trials), threads,
                     [&](std::size_t t) { plan.trial(p, static_cast<Index>(t), values); });
        auto add_row = [&](const std::string& name, const Summary& s, Index count) {
          ResultRow r;
          r.experiment = to_string(cfg.experiment);
          r.n = cfg.n;
          r.s = cfg.s;
          r.M = M;
          r.m = m;
          r.A = A;
          r.snr_db = cfg.snr_db;
          r.metric_name = name;
          r.mean = s.mean;
          r.median = s.median;
          r.std = s.std;
          r.trials = count;
          r.seed = cfg.seed;
          table.rows.push_back(std::move(r));
        };
        for (std::size_t k = 0; k < plan.metrics.size(); ++k)
          add_row(plan.metrics[k], summarize(values.values(k)), trials);
        for (const auto& [name, v] : formula_rows(cfg, p)) add_row(name, Summary{v, v, 0.0}, 1);
      }
    }
  }
  return table;
}

}  // namespace suprec
