// Command-line front end: run experiment sweeps, print width estimates and
// mismatch audits.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "suprec/analysis.hpp"
#include "suprec/experiment.hpp"
#include "suprec/parallel.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

// Runs the sweep and writes CSV (stdout when no path) plus the sidecar.
int run_and_write(suprec::ExperimentConfig cfg, const std::string& out_path, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  const auto table = suprec::run_experiment(cfg, threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string csv = suprec::to_csv(table);
  const std::string path = out_path.empty() ? cfg.output_path : out_path;
  if (path.empty()) {
    std::cout << csv;
    return 0;
  }
  write_file(path, csv);
  nlohmann::json meta;
  meta["config_hash"] = suprec::config_hash(cfg);
  meta["config"] = nlohmann::json::parse(suprec::serialize_config(cfg));
  meta["version"] = suprec::kVersion;
  meta["wall_time_seconds"] = wall;
  meta["threads"] = threads;
  meta["rows"] = table.rows.size();
  write_file(path + ".meta.json", meta.dump(2) + "\n");
  std::cerr << "wrote " << table.rows.size() << " rows to " << path << " in " << wall << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recovery from superimposed non-linear measurements: experiment harness"};
  app.require_subcommand(1);

  unsigned threads = suprec::default_thread_count();

  auto* run = app.add_subcommand("run", "Run the experiment sweep described by a JSON config");
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "CSV output path (default: config output_path or stdout)");
  run->add_option("--threads", threads, "Worker threads (default: SUPREC_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the config seed");

  auto* audit = app.add_subcommand("audit", "Mismatch audit for the model in a config");
  std::string audit_config, audit_out;
  audit->add_option("config", audit_config, "Config file")->required()->check(CLI::ExistingFile);
  audit->add_option("--out", audit_out, "CSV output path (default: stdout)");
  audit->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* widths = app.add_subcommand("widths", "Estimate mean widths and sample-size formulas");
  suprec::Index n = 64, s = 4, nodes = 1, samples = 10000;
  double delta = 1.0;
  std::uint64_t width_seed = 0;
  widths->add_option("--n", n, "Ambient dimension")->check(CLI::PositiveNumber);
  widths->add_option("--s", s, "Sparsity")->check(CLI::PositiveNumber);
  widths->add_option("--M", nodes, "Node count")->check(CLI::PositiveNumber);
  widths->add_option("--trials", samples, "Monte-Carlo samples")->check(CLI::Range(2, 100000000));
  widths->add_option("--delta", delta, "Target accuracy for the formulas")->check(CLI::Range(1e-6, 1.0));
  widths->add_option("--seed", width_seed, "Seed");
  widths->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = suprec::parse_config(read_file(config_path));
      if (seed) cfg.seed = *seed;
      return run_and_write(cfg, out_path, threads);
    }
    if (*audit) {
      auto cfg = suprec::parse_config(read_file(audit_config));
      cfg.experiment = suprec::ExperimentKind::mismatch_audit;
      cfg.output_path.clear();
      return run_and_write(cfg, audit_out, threads);
    }
    if (*widths) {
      if (s > n) throw std::invalid_argument("--s must not exceed --n");
      const auto x0 = suprec::generate_sparse_source(n, s, width_seed);
      const auto l1 = suprec::conic_mean_width_l1(x0.entries, samples, width_seed, threads);
      const auto l12 = suprec::conic_mean_width_l12(x0.entries, Eigen::VectorXd::Ones(nodes), samples,
                                                    width_seed, threads);
      const auto global = suprec::global_mean_width(
          suprec::ConstraintSet::l1_ball(std::sqrt(static_cast<double>(s)), n), samples, width_seed, threads);
      suprec::SampleComplexityQuery q;
      q.s = s;
      q.n = n;
      q.nodes = nodes;
      q.delta = delta;
      std::printf("quantity,value,std_error\n");
      std::printf("conic_l1_width,%.12g,%.12g\n", l1.value, l1.std_error);
      std::printf("conic_l1_width_sq,%.12g,%.12g\n", l1.squared_value, l1.squared_std_error);
      std::printf("conic_l12_width,%.12g,%.12g\n", l12.value, l12.std_error);
      std::printf("conic_l12_width_sq,%.12g,%.12g\n", l12.squared_value, l12.squared_std_error);
      std::printf("global_l1_width_sqrt_s,%.12g,%.12g\n", global.value, global.std_error);
      q.rule = suprec::SampleComplexityQuery::Rule::direct;
      std::printf("predicted_m_direct,%.12g,0\n", suprec::sample_complexity(q));
      q.rule = suprec::SampleComplexityQuery::Rule::lifting;
      std::printf("predicted_m_lifting,%.12g,0\n", suprec::sample_complexity(q));
      q.width = std::sqrt(l12.squared_value);
      q.rule = suprec::SampleComplexityQuery::Rule::hybrid_conic;
      std::printf("predicted_m_hybrid_conic,%.12g,0\n", suprec::sample_complexity(q));
      q.width = global.value;
      q.rule = suprec::SampleComplexityQuery::Rule::hybrid_global;
      std::printf("predicted_m_hybrid_global,%.12g,0\n", suprec::sample_complexity(q));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
