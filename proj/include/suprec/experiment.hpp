#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "suprec/model.hpp"

namespace suprec {

/// Invalid experiment configuration. The message names the offending key.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind {
  clip_sweep,
  coherent_vs_noncoherent,
  phase_transition,
  mismatch_audit,
  width_study,
};

enum class RadiusRule {
  nominal, // mubar * sqrt(s) (coherent), sqrt(M) * sqrt(s) (lifting)
  oracle,  // the norm of the target under the constraint
};

enum class WeightRule { ones, identity, sign_mu };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::clip_sweep;
  Index n = 64;
  Index s = 4;
  std::vector<Index> M_list{1};
  std::vector<Index> m_list{32};
  std::vector<double> A_list{1.0};
  std::optional<double> snr_db;
  SnrReference snr_reference = SnrReference::aggregate;
  Index trials = 100;
  std::uint64_t seed = 0;
  RadiusRule radius_rule = RadiusRule::nominal;
  double radius_scale = 1.0;  // multiplicative mistuning of R
  WeightRule weight_rule = WeightRule::sign_mu;
  DistributionSpec::Family distribution = DistributionSpec::Family::gaussian;
  Index mc_trials = 10000;  // Monte-Carlo samples for model-level estimates
  int max_iters = 10000;
  std::string output_path;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

std::string to_string(ExperimentKind kind);

/// Strict JSON parsing: unknown keys, duplicate keys, wrong types and
/// constraint violations are rejected with a message naming the key. Only
/// `experiment`, `n` and `s` are required.
ExperimentConfig parse_config(const std::string& text);
/// Canonical JSON (sorted keys, every field explicit).
std::string serialize_config(const ExperimentConfig& cfg);
/// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct ResultRow {
  std::string experiment;
  Index n = 0;
  Index s = 0;
  Index M = 0;
  Index m = 0;
  double A = 0.0;
  std::optional<double> snr_db;
  std::string metric_name;
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;
  Index trials = 0;
  std::uint64_t seed = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  /// Rows matching (metric, M, m, A); throws if absent.
  const ResultRow& find(const std::string& metric, Index M, Index m, double A) const;
};

/// Runs every parameter point of the sweep. Trials are independent and
/// seeded from (seed, trial), so the table does not depend on `threads`.
ResultTable run_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

/// CSV with header, %.12g numbers, LF line endings.
std::string to_csv(const ResultTable& table);

extern const char* const kVersion;

}  // namespace suprec
