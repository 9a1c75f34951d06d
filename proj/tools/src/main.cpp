#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rbfvmc/errors.hpp"
#include "rbfvmc/experiment.hpp"
#include "rbfvmc/oracle.hpp"
#include "rbfvmc/presets.hpp"

namespace fs = std::filesystem;

namespace {

int do_run(const std::string& config_path) {
  const rbfvmc::ExperimentConfig cfg = rbfvmc::load_config_file(config_path);
  const rbfvmc::ExperimentResult result = rbfvmc::run_experiment(cfg);
  const rbfvmc::RunRecord& rec = result.record;
  std::printf("artifacts: %s\n", result.out_dir.string().c_str());
  std::printf("iterations: %zu\n", rec.rows.size());
  std::printf("energy: %.10g +- %.3g\n", rec.final_energy, rec.final_error);
  if (result.reference_energy) {
    std::printf("dense reference: %.10g\n", *result.reference_energy);
  }
  if (rec.aborted) {
    std::fprintf(stderr, "optimization aborted: %s\n", rec.abort_reason.c_str());
    return 3;
  }
  return 0;
}

int do_reproduce(const std::string& preset, std::uint64_t seed,
                 const std::string& out_opt) {
  fs::path out_dir;
  if (const char* env = std::getenv(rbfvmc::kOutputDirEnvVar); env && *env) {
    out_dir = env;
  } else if (!out_opt.empty()) {
    out_dir = out_opt;
  } else {
    out_dir = "reproduce-" + preset;
  }
  const rbfvmc::PresetReport report = rbfvmc::run_preset(preset, seed, out_dir);
  std::fputs(report.text.c_str(), stdout);
  std::ofstream(out_dir / "report.txt") << report.text;
  for (const rbfvmc::PresetRow& row : report.rows) {
    if (row.aborted) return 3;
  }
  return report.all_pass ? 0 : 1;
}

int do_eigvec_report(const std::string& config_path) {
  const rbfvmc::ExperimentConfig cfg = rbfvmc::load_config_file(config_path);
  const fs::path out_dir = rbfvmc::resolve_output_dir(cfg);
  const fs::path net_path = out_dir / "network.txt";
  if (!fs::exists(net_path)) {
    const rbfvmc::ExperimentResult result = rbfvmc::run_experiment(cfg);
    if (result.record.aborted) {
      std::fprintf(stderr, "optimization aborted: %s\n",
                   result.record.abort_reason.c_str());
      return 3;
    }
  }
  const rbfvmc::RbfNetwork net = rbfvmc::read_network(net_path);
  const rbfvmc::OracleResult oracle = rbfvmc::dense_lowest_eig(cfg.model);

  Eigen::VectorXd v = rbfvmc::tabulate_amplitudes(net, cfg.model);
  const double norm = v.norm();
  if (!(norm > 1e-30)) {
    std::fprintf(stderr, "stored network is numerically null\n");
    return 1;
  }
  v /= norm;
  if (v.dot(oracle.eigenvector) < 0.0) v = -v;

  std::ostringstream text;
  text << "dense energy " << oracle.energy << "\n";
  text << "level gap " << oracle.gap << "\n";
  if (oracle.gap < 1e-10) {
    text << "warning: ground space is degenerate to 1e-10, "
            "component comparison is indeterminate\n";
  }
  text << "index network dense\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    char line[80];
    std::snprintf(line, sizeof line, "%5ld %12.6f %12.6f\n",
                  static_cast<long>(i), v[i], oracle.eigenvector[i]);
    text << line;
  }
  char tail[64];
  std::snprintf(tail, sizeof tail, "euclidean error %.6g\n",
                (v - oracle.eigenvector).norm());
  text << tail;

  std::fputs(text.str().c_str(), stdout);
  std::ofstream(out_dir / "eigvec.txt") << text.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational Monte Carlo with a radial-basis-function ansatz "
               "over truncated discrete bases"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "optimize per a config file and write artifacts");
  run->add_option("config", config_path, "config file path")->required();

  std::string preset;
  std::uint64_t seed = rbfvmc::kDefaultPresetSeed;
  std::string out_opt;
  auto* rep = app.add_subcommand("reproduce",
                                 "rerun a built-in benchmark and compare "
                                 "against its reference values");
  rep->add_option("preset", preset, "one of: truncation box matrix efield overlaps")
      ->required();
  rep->add_option("--seed", seed, "base seed");
  rep->add_option("--out", out_opt, "output directory");

  std::string eig_config;
  auto* eig = app.add_subcommand("eigvec-report",
                                 "compare the stored network against the "
                                 "dense ground eigenvector");
  eig->add_option("config", eig_config, "config file path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return do_run(config_path);
    if (rep->parsed()) return do_reproduce(preset, seed, out_opt);
    return do_eigvec_report(eig_config);
  } catch (const rbfvmc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const rbfvmc::OptimizerError& e) {
    std::fprintf(stderr, "optimizer error: %s\n", e.what());
    return 3;
  } catch (const rbfvmc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
