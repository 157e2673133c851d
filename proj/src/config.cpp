#include "fksteer/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fksteer/csv.hpp"
#include "fksteer/error.hpp"

namespace fks {
namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  std::string_view text = csv::trim(v);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const std::string_view text = csv::trim(v);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    // Accept integral values written in floating notation (1e5).
    const double d = to_double(key, v);
    if (d != static_cast<double>(static_cast<long long>(d))) {
      throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
    }
    return static_cast<long long>(d);
  }
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const auto n = to_int(key, v);
  if (n < 0) throw ConfigError("'" + key + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("'" + key + "': expected true|false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (csv::trim(v).empty()) return out;
  for (const auto& field : csv::split(v, ',')) out.push_back(to_double(key, field));
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += csv::format_double(values[i]);
  }
  return out;
}

std::vector<AngleWell> to_wells(const std::string& key, const std::string& v) {
  std::vector<AngleWell> wells;
  for (const auto& item : csv::split(v, ';')) {
    const auto parts = csv::split(item, ':');
    if (parts.size() != 3) throw ConfigError("'" + key + "': expected mean:width:weight;...");
    wells.push_back({to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])});
  }
  return wells;
}

std::string describe_wells(const std::vector<AngleWell>& wells) {
  std::string out;
  for (std::size_t i = 0; i < wells.size(); ++i) {
    if (i) out += ';';
    out += csv::format_double(wells[i].mean_deg) + ':' + csv::format_double(wells[i].width_deg) +
           ':' + csv::format_double(wells[i].weight);
  }
  return out;
}

std::string fmt(double v) { return csv::format_double(v); }

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"backend",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          if (v == "discrete") c.backend = BackendKind::discrete;
          else if (v == "gaussian") c.backend = BackendKind::gaussian;
          else if (v == "chainmol") c.backend = BackendKind::chainmol;
          else throw ConfigError("unknown backend '" + v + "' (expected discrete|gaussian|chainmol)");
        },
        [](const RunConfig& c) { return to_string(c.backend); }}},
      {"T", {[](RunConfig& c, const std::string& k, const std::string& v) { c.steps = static_cast<int>(to_int(k, v)); },
             [](const RunConfig& c) { return std::to_string(c.steps); }}},
      {"S", {[](RunConfig& c, const std::string& k, const std::string& v) { c.states = to_count(k, v); },
             [](const RunConfig& c) { return std::to_string(c.states); }}},
      {"kernel_file", {[](RunConfig& c, const std::string&, const std::string& v) { c.kernel_file = v; },
                       [](const RunConfig& c) { return c.kernel_file; }}},
      {"pi_T", {[](RunConfig& c, const std::string& k, const std::string& v) { c.pi_T = to_list(k, v); },
                [](const RunConfig& c) { return join(c.pi_T); }}},
      {"backend_seed",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.backend_seed = to_count(k, v); },
        [](const RunConfig& c) { return std::to_string(c.backend_seed); }}},
      {"dirichlet", {[](RunConfig& c, const std::string& k, const std::string& v) { c.dirichlet = to_double(k, v); },
                     [](const RunConfig& c) { return fmt(c.dirichlet); }}},
      {"rho", {[](RunConfig& c, const std::string& k, const std::string& v) { c.rho = to_double(k, v); },
               [](const RunConfig& c) { return fmt(c.rho); }}},
      {"dim", {[](RunConfig& c, const std::string& k, const std::string& v) { c.dim = to_count(k, v); },
               [](const RunConfig& c) { return std::to_string(c.dim); }}},
      {"L_binder",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.residues = to_count(k, v); },
        [](const RunConfig& c) { return std::to_string(c.chain.residues); }}},
      {"bond_k", {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.bond_k = to_double(k, v); },
                  [](const RunConfig& c) { return fmt(c.chain.bond_k); }}},
      {"bond_length",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.bond_length = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.chain.bond_length); }}},
      {"angle_k", {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.angle_k = to_double(k, v); },
                   [](const RunConfig& c) { return fmt(c.chain.angle_k); }}},
      {"angle_wells",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.angle_wells = to_wells(k, v); },
        [](const RunConfig& c) { return describe_wells(c.chain.angle_wells); }}},
      {"eta_start",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.eta_start = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.chain.eta_start); }}},
      {"eta_end", {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.eta_end = to_double(k, v); },
                   [](const RunConfig& c) { return fmt(c.chain.eta_end); }}},
      {"sigma_start",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.sigma_start = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.chain.sigma_start); }}},
      {"sigma_end",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.chain.sigma_end = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.chain.sigma_end); }}},
      {"drift_substeps",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.chain.substeps = static_cast<int>(to_int(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.chain.substeps); }}},
      {"n_particles",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.n_particles = to_count(k, v); },
        [](const RunConfig& c) { return std::to_string(c.n_particles); }}},
      {"tau", {[](RunConfig& c, const std::string& k, const std::string& v) { c.tau = to_double(k, v); },
               [](const RunConfig& c) { return fmt(c.tau); }}},
      {"t_start", {[](RunConfig& c, const std::string& k, const std::string& v) { c.t_start = static_cast<int>(to_int(k, v)); },
                   [](const RunConfig& c) { return std::to_string(c.t_start); }}},
      {"dt", {[](RunConfig& c, const std::string& k, const std::string& v) { c.dt = static_cast<int>(to_int(k, v)); },
              [](const RunConfig& c) { return std::to_string(c.dt); }}},
      {"potential",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.potential = parse_potential_kind(v); },
        [](const RunConfig& c) { return to_string(c.potential); }}},
      {"terminal_correction",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "auto") c.terminal_correction.reset();
          else c.terminal_correction = to_bool(k, v);
        },
        [](const RunConfig& c) {
          return c.terminal_correction ? std::string(*c.terminal_correction ? "true" : "false")
                                       : std::string("auto");
        }}},
      {"resample_method",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.resample_method = parse_resample_method(v); },
        [](const RunConfig& c) { return to_string(c.resample_method); }}},
      {"reward", {[](RunConfig& c, const std::string&, const std::string& v) { c.reward = parse_reward_kind(v); },
                  [](const RunConfig& c) { return to_string(c.reward); }}},
      {"n_evals", {[](RunConfig& c, const std::string& k, const std::string& v) { c.n_evals = to_count(k, v); },
                   [](const RunConfig& c) { return std::to_string(c.n_evals); }}},
      {"aggregation",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.aggregation = parse_aggregation(v); },
        [](const RunConfig& c) { return to_string(c.aggregation); }}},
      {"refiner_temperature",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.refiner_temperature = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.refiner_temperature); }}},
      {"q_star", {[](RunConfig& c, const std::string& k, const std::string& v) { c.q_star = static_cast<int>(to_int(k, v)); },
                  [](const RunConfig& c) { return std::to_string(c.q_star); }}},
      {"ss_target",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.ss_targets = SecondaryStructureTargets::steer_toward(parse_ss_class(v));
        },
        nullptr}},
      {"alpha_star",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.ss_targets.alpha_star = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.ss_targets.alpha_star); }}},
      {"beta_star",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.ss_targets.beta_star = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.ss_targets.beta_star); }}},
      {"ell_star",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.ss_targets.ell_star = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.ss_targets.ell_star); }}},
      {"w_alpha", {[](RunConfig& c, const std::string& k, const std::string& v) { c.ss_targets.w_alpha = to_double(k, v); },
                   [](const RunConfig& c) { return fmt(c.ss_targets.w_alpha); }}},
      {"w_beta", {[](RunConfig& c, const std::string& k, const std::string& v) { c.ss_targets.w_beta = to_double(k, v); },
                  [](const RunConfig& c) { return fmt(c.ss_targets.w_beta); }}},
      {"w_ell", {[](RunConfig& c, const std::string& k, const std::string& v) { c.ss_targets.w_ell = to_double(k, v); },
                 [](const RunConfig& c) { return fmt(c.ss_targets.w_ell); }}},
      {"target_file", {[](RunConfig& c, const std::string&, const std::string& v) { c.target_file = v; },
                       [](const RunConfig& c) { return c.target_file; }}},
      {"reward_values",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.reward_values = to_list(k, v); },
        [](const RunConfig& c) { return join(c.reward_values); }}},
      {"slope", {[](RunConfig& c, const std::string& k, const std::string& v) { c.slope = to_double(k, v); },
                 [](const RunConfig& c) { return fmt(c.slope); }}},
      {"worker_command", {[](RunConfig& c, const std::string&, const std::string& v) { c.worker_command = v; },
                          [](const RunConfig& c) { return c.worker_command; }}},
      {"worker_timeout_ms",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.worker_timeout_ms = static_cast<int>(to_int(k, v)); },
        [](const RunConfig& c) { return std::to_string(c.worker_timeout_ms); }}},
      {"seed", {[](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_count(k, v); },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"threads", {[](RunConfig& c, const std::string& k, const std::string& v) { c.threads = to_count(k, v); },
                   [](const RunConfig& c) { return std::to_string(c.threads); }}},
      {"log_every_step",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.log_every_step = to_bool(k, v); },
        [](const RunConfig& c) { return std::string(c.log_every_step ? "true" : "false"); }}},
      {"record_trajectory",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.record_trajectory = to_bool(k, v); },
        [](const RunConfig& c) { return std::string(c.record_trajectory ? "true" : "false"); }}},
      {"snapshot_states",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.snapshot_states = to_bool(k, v); },
        [](const RunConfig& c) { return std::string(c.snapshot_states ? "true" : "false"); }}},
      {"out", {[](RunConfig& c, const std::string&, const std::string& v) { c.out = v; },
               [](const RunConfig& c) { return c.out; }}},
      {"run_id", {[](RunConfig& c, const std::string&, const std::string& v) { c.run_id = v; },
                  [](const RunConfig& c) { return c.run_id; }}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [name, field] : fields()) out.push_back(name);
    return out;
  }();
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(config, key, std::string(csv::trim(value)));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  apply_setting(config, std::string(csv::trim(std::string_view(assignment).substr(0, eq))),
                assignment.substr(eq + 1));
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = std::string(csv::trim(std::string_view(line).substr(0, hash)));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = std::string(csv::trim(std::string_view(body).substr(0, eq)));
    auto value = std::string(csv::trim(std::string_view(body).substr(eq + 1)));
    if ((key == "kernel_file" || key == "target_file") && !value.empty() &&
        std::filesystem::path(value).is_relative()) {
      value = (path.parent_path() / value).lexically_normal().string();
    }
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : fields()) {
    if (field.get) out.emplace_back(name, field.get(config));
  }
  return out;
}

void validate(const RunConfig& c) {
  if (c.steps < 1) throw ConfigError("T must be >= 1");
  if (c.n_particles < 1) throw ConfigError("n_particles must be >= 1");
  if (!(c.tau > 0.0)) throw ConfigError("tau must be positive");
  if (c.t_start < 1 || c.t_start > c.steps) {
    throw ConfigError("t_start must lie in [1, T] (T=" + std::to_string(c.steps) + ")");
  }
  if (c.dt < 1) throw ConfigError("dt must be >= 1");
  if (c.n_evals < 1) throw ConfigError("n_evals must be >= 1");
  if (!(c.refiner_temperature > 0.0)) throw ConfigError("refiner_temperature must be positive");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.worker_timeout_ms < 1) throw ConfigError("worker_timeout_ms must be >= 1");

  const bool chain = c.backend == BackendKind::chainmol;
  switch (c.reward) {
    case RewardKind::state_table:
      if (c.backend != BackendKind::discrete) throw ConfigError("state_table reward needs backend = discrete");
      if (!c.reward_values.empty() && c.reward_values.size() != c.states) {
        throw ConfigError("reward_values needs S = " + std::to_string(c.states) + " entries");
      }
      break;
    case RewardKind::linear:
      if (c.backend != BackendKind::gaussian) throw ConfigError("linear reward needs backend = gaussian");
      break;
    case RewardKind::charge:
    case RewardKind::secondary_structure:
    case RewardKind::binding:
      if (!chain) throw ConfigError(to_string(c.reward) + " reward needs backend = chainmol");
      break;
    case RewardKind::external:
      if (c.worker_command.empty()) throw ConfigError("external reward needs worker_command");
      break;
  }
  if (c.reward == RewardKind::secondary_structure) (void)c.ss_targets.normalized();
  if (c.backend == BackendKind::discrete && !c.pi_T.empty() && c.pi_T.size() != c.states) {
    throw ConfigError("pi_T needs S = " + std::to_string(c.states) + " entries");
  }
}

std::unique_ptr<Backend> make_backend(const RunConfig& c) {
  switch (c.backend) {
    case BackendKind::discrete: {
      const auto generated = DiscreteChainBackend::random(c.states, c.steps, c.backend_seed, c.dirichlet);
      if (c.kernel_file.empty() && c.pi_T.empty()) {
        return std::make_unique<DiscreteChainBackend>(generated);
      }
      std::vector<std::vector<double>> kernels;
      if (!c.kernel_file.empty()) {
        kernels = load_kernel_csv(c.kernel_file, c.states, c.steps);
      } else {
        for (int t = 1; t <= c.steps; ++t) {
          const auto k = generated.kernel(t);
          kernels.emplace_back(k.begin(), k.end());
        }
      }
      auto pi = c.pi_T.empty() ? generated.initial_law() : c.pi_T;
      return std::make_unique<DiscreteChainBackend>(std::move(pi), std::move(kernels));
    }
    case BackendKind::gaussian:
      return std::make_unique<GaussianChainBackend>(c.steps, c.rho, c.dim);
    case BackendKind::chainmol: {
      ChainMolParams params = c.chain;
      params.steps = c.steps;
      return std::make_unique<ChainMolBackend>(std::move(params));
    }
  }
  throw ConfigError("unknown backend");
}

RewardPipelineSpec make_reward_spec(const RunConfig& c) {
  RewardPipelineSpec spec;
  spec.kind = c.reward;
  spec.n_evals = c.n_evals;
  spec.aggregation = c.aggregation;
  spec.refiner_temperature = c.refiner_temperature;
  spec.q_star = c.q_star;
  spec.ss_targets = c.ss_targets;
  spec.slope = c.slope;
  spec.worker = {c.worker_command, c.worker_timeout_ms, c.run_id};
  if (c.reward == RewardKind::binding) {
    if (c.target_file.empty()) {
      spec.target_coords = default_binding_target();
    } else {
      for (const auto& row : csv::read_numeric(c.target_file)) {
        if (row.size() != 2) throw ConfigError(c.target_file + ": target rows need two columns (x,y)");
        spec.target_coords.push_back(row[0]);
        spec.target_coords.push_back(row[1]);
      }
      if (spec.target_coords.empty()) throw ConfigError(c.target_file + ": no target points");
    }
  }
  if (c.reward == RewardKind::state_table) {
    spec.state_rewards = c.reward_values;
    if (spec.state_rewards.empty()) {
      for (std::size_t j = 0; j < c.states; ++j) spec.state_rewards.push_back(static_cast<double>(j));
    }
  }
  return spec;
}

RunConfig sweep_defaults() {
  RunConfig c;
  c.backend = BackendKind::chainmol;
  c.steps = 50;
  c.chain.residues = 15;
  c.tau = 10.0;
  c.n_particles = 20;
  c.t_start = 50;
  c.dt = 2;
  c.potential = PotentialKind::immediate;
  c.reward = RewardKind::binding;
  return c;
}

}  // namespace fks
