#include "rbfvmc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "rbfvmc/errors.hpp"
#include "rbfvmc/oracle.hpp"

namespace rbfvmc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

class KeyBag {
 public:
  explicit KeyBag(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("expected 'key = value', got '" + line + "'");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty()) {
        throw ConfigError("empty key or value in '" + line + "'");
      }
      if (!pairs_.emplace(key, value).second) {
        throw ConfigError("duplicate key '" + key + "'");
      }
    }
  }

  std::optional<std::string> take(const std::string& key) {
    const auto it = pairs_.find(key);
    if (it == pairs_.end()) return std::nullopt;
    std::string value = it->second;
    pairs_.erase(it);
    return value;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    return *v;
  }

  void expect_empty() const {
    if (!pairs_.empty()) {
      throw ConfigError("unknown key '" + pairs_.begin()->first + "'");
    }
  }

 private:
  std::map<std::string, std::string> pairs_;
};

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' has a non-numeric value '" + value + "'");
  }
  if (used != value.size()) {
    throw ConfigError("key '" + key + "' has trailing characters in '" + value + "'");
  }
  return out;
}

long to_long(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' has a non-integer value '" + value + "'");
  }
  if (used != value.size()) {
    throw ConfigError("key '" + key + "' has trailing characters in '" + value + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' has a non-integer value '" + value + "'");
  }
  if (used != value.size()) {
    throw ConfigError("key '" + key + "' has trailing characters in '" + value + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  KeyBag bag(text);
  ExperimentConfig cfg;

  const std::string type = bag.require("model.type");
  if (type == "ho1d") {
    Ho1d m;
    m.field = to_double("model.field", bag.require("model.field"));
    m.n_max = static_cast<int>(to_long("model.n_max", bag.require("model.n_max")));
    cfg.model.variant = m;
  } else if (type == "ho2d") {
    Ho2d m;
    m.field_x = to_double("model.field_x", bag.require("model.field_x"));
    m.field_y = to_double("model.field_y", bag.require("model.field_y"));
    m.n_max = static_cast<int>(to_long("model.n_max", bag.require("model.n_max")));
    cfg.model.variant = m;
  } else if (type == "box") {
    ParticleBox m;
    m.slope = to_double("model.slope", bag.require("model.slope"));
    m.n_max = static_cast<int>(to_long("model.n_max", bag.require("model.n_max")));
    cfg.model.variant = m;
  } else if (type == "matrix") {
    const auto dim = bag.take("model.dimension");
    const auto file = bag.take("model.file");
    if (dim && file) {
      throw ConfigError("give either model.dimension or model.file, not both");
    }
    if (dim) {
      cfg.model.variant =
          HermitianMatrix{static_cast<int>(to_long("model.dimension", *dim)), nullptr};
    } else if (file) {
      cfg.model.variant = load_matrix_file(*file);
    } else {
      throw ConfigError("matrix model needs model.dimension or model.file");
    }
  } else {
    throw ConfigError("unknown model.type '" + type + "'");
  }
  cfg.model.validate();

  if (auto v = bag.take("network.m")) {
    cfg.hidden_count = static_cast<int>(to_long("network.m", *v));
  }
  if (auto v = bag.take("network.activation")) {
    cfg.activation = activation_from_string(*v);
  }
  if (auto v = bag.take("network.scale")) {
    cfg.init_scale = to_double("network.scale", *v);
  }

  if (auto v = bag.take("sampler.n_samples")) {
    cfg.sampler.n_samples = to_long("sampler.n_samples", *v);
  }
  if (auto v = bag.take("sampler.n_therm")) {
    cfg.sampler.n_therm = to_long("sampler.n_therm", *v);
  }
  if (auto v = bag.take("sampler.stride")) {
    cfg.sampler.stride = to_long("sampler.stride", *v);
  }
  if (auto v = bag.take("sampler.n_chains")) {
    cfg.sampler.n_chains = static_cast<int>(to_long("sampler.n_chains", *v));
  }

  if (auto v = bag.take("sr.alpha")) cfg.sr.alpha = to_double("sr.alpha", *v);
  if (auto v = bag.take("sr.max_iter")) {
    cfg.sr.max_iter = static_cast<int>(to_long("sr.max_iter", *v));
  }
  if (auto v = bag.take("sr.reg_init")) cfg.sr.reg_init = to_double("sr.reg_init", *v);
  if (auto v = bag.take("sr.reg_decay")) cfg.sr.reg_decay = to_double("sr.reg_decay", *v);
  if (auto v = bag.take("sr.reg_floor")) cfg.sr.reg_floor = to_double("sr.reg_floor", *v);
  if (auto v = bag.take("sr.convergence_window")) {
    cfg.sr.convergence_window = static_cast<int>(to_long("sr.convergence_window", *v));
  }
  if (auto v = bag.take("sr.convergence_tol")) {
    cfg.sr.convergence_tol = to_double("sr.convergence_tol", *v);
  }

  if (auto v = bag.take("seed")) cfg.seed = to_u64("seed", *v);
  if (auto v = bag.take("output.dir")) cfg.output_dir = *v;

  bag.expect_empty();

  if (cfg.hidden_count < 1) throw ConfigError("network.m must be positive");
  try {
    cfg.sr.validate();
    cfg.sampler.validate(input_dim(cfg.model));
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnvVar); env && *env) {
    return std::filesystem::path(env);
  }
  return std::filesystem::path(cfg.output_dir);
}

void write_network(const RbfNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write network file '" + path.string() + "'");
  out << "rbf-network 1\n";
  out << to_string(net.activation) << "\n";
  out << net.hidden_count << " " << net.input_dim << "\n";
  const Eigen::VectorXd flat = net.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    out << format_double(flat[i]) << "\n";
  }
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

RbfNetwork read_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network file '" + path.string() + "'");
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (!in || tag != "rbf-network" || version != 1) {
    throw ConfigError("unrecognized network file header");
  }
  std::string activation;
  in >> activation;
  RbfNetwork net;
  net.activation = activation_from_string(activation);
  in >> net.hidden_count >> net.input_dim;
  if (!in || net.hidden_count < 1 || net.input_dim < 1) {
    throw ConfigError("bad network shape in '" + path.string() + "'");
  }
  Eigen::VectorXd flat(net.parameter_count());
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    if (!(in >> flat[i])) {
      throw ConfigError("network file ended before all parameters were read");
    }
  }
  net.weights.resize(net.hidden_count);
  net.spreads.resize(net.hidden_count);
  net.centers.resize(net.hidden_count, net.input_dim);
  net.unflatten(flat);
  net.validate();
  return net;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return run_experiment_to(cfg, resolve_output_dir(cfg));
}

ExperimentResult run_experiment_to(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
  cfg.model.validate();
  const auto upper = upper_bounds(cfg.model);
  const int range = *std::max_element(upper.begin(), upper.end()) + 1;

  RbfNetwork net = init_random(cfg.hidden_count, input_dim(cfg.model), range,
                               mix_seed(cfg.seed, 0xA11), cfg.init_scale,
                               cfg.activation);
  SamplerConfig sampler_cfg = cfg.sampler;
  sampler_cfg.seed = mix_seed(cfg.seed, 0x5A);

  ExperimentResult result;
  result.record = optimize(net, cfg.model, sampler_cfg, cfg.sr);
  result.out_dir = out_dir;

  try {
    result.reference_energy = dense_lowest_eig(cfg.model).energy;
  } catch (const SizeError&) {
    result.reference_energy = std::nullopt;
  }

  std::filesystem::create_directories(result.out_dir);

  {
    std::ofstream csv(result.out_dir / "record.csv");
    if (!csv) throw ConfigError("cannot write record.csv");
    csv << "iter,energy,error,acceptance,r_k,flagged\n";
    for (const IterationRow& row : result.record.rows) {
      csv << row.iter << "," << format_double(row.energy) << ","
          << format_double(row.error) << "," << format_double(row.acceptance)
          << "," << format_double(row.r_k) << "," << (row.flagged ? 1 : 0)
          << "\n";
    }
  }

  write_network(result.record.last_net, result.out_dir / "network.txt");

  {
    std::ofstream summary(result.out_dir / "summary.txt");
    if (!summary) throw ConfigError("cannot write summary.txt");
    const RunRecord& rec = result.record;
    summary << "iterations " << rec.rows.size() << "\n";
    summary << "final_energy " << format_double(rec.final_energy) << "\n";
    summary << "final_error " << format_double(rec.final_error) << "\n";
    summary << "best_energy " << format_double(rec.best_energy) << "\n";
    summary << "best_error " << format_double(rec.best_error) << "\n";
    summary << "converged " << (rec.converged ? 1 : 0) << "\n";
    summary << "aborted " << (rec.aborted ? 1 : 0) << "\n";
    if (!rec.abort_reason.empty()) {
      summary << "abort_reason " << rec.abort_reason << "\n";
    }
    if (result.reference_energy) {
      summary << "reference_energy " << format_double(*result.reference_energy)
              << "\n";
      if (rec.final_error > 0.0) {
        summary << "deviation_sigma "
                << format_double((rec.final_energy - *result.reference_energy) /
                                 rec.final_error)
                << "\n";
      }
    }
  }

  return result;
}

}  // namespace rbfvmc
