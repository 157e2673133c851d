#include "fksteer/engine.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fksteer/csv.hpp"
#include "fksteer/error.hpp"
#include "fksteer/parallel.hpp"
#include "fksteer/simd/kernels.hpp"
#include "fksteer/worker.hpp"
#include "json.hpp"

namespace fks {
namespace {

std::vector<double> state_values(const BackendState& s) {
  if (std::holds_alternative<std::size_t>(s.payload)) return {static_cast<double>(s.symbol())};
  return s.values();
}

std::string join_values(const std::vector<double>& v, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += csv::format_double(v[i]);
  }
  return out;
}

// Streams trajectory and event rows to the output directory as they happen.
class Artifacts {
 public:
  Artifacts(const RunConfig& config, const std::string& mode) : config_(config), mode_(mode) {
    if (config.out.empty()) return;
    dir_ = config.out;
    std::filesystem::create_directories(dir_);
    write_manifest(dir_ / "run_manifest.json", config, mode, nullptr);
    trajectory_ = csv::Writer(dir_ / "trajectory.csv",
                              "t,particle,reward,scaled_reward,log_potential,weight,ancestor,lineage,"
                              "reward_sd,guided,tokens,state");
    events_ = csv::Writer(dir_ / "events.csv", "t,ess,entropy,max_weight_deviation,multiplicity");
  }

  bool enabled() const { return !dir_.empty(); }

  void row(const TrajectoryRow& r) {
    if (!enabled()) return;
    trajectory_.row({std::to_string(r.t), std::to_string(r.particle), csv::format_double(r.reward),
                     csv::format_double(r.scaled_reward), csv::format_double(r.log_potential),
                     csv::format_double(r.weight), std::to_string(r.ancestor),
                     std::to_string(r.lineage), csv::format_double(r.reward_spread),
                     r.guided ? "1" : "0", r.tokens, join_values(r.snapshot)});
  }

  void event(const ResampleEvent& e) {
    if (!enabled()) return;
    std::string counts;
    for (std::size_t i = 0; i < e.multiplicity.size(); ++i) {
      if (i) counts += ' ';
      counts += std::to_string(e.multiplicity[i]);
    }
    events_.row({std::to_string(e.t), csv::format_double(e.ess), csv::format_double(e.entropy),
                 csv::format_double(e.max_weight_deviation), counts});
  }

  void flush() {
    if (!enabled()) return;
    trajectory_.flush();
    events_.flush();
  }

  void finish(const RunResult& result) {
    if (!enabled()) return;
    flush();
    csv::Writer terminal(dir_ / "terminal.csv", "particle,lineage,reward,weight,tokens,alpha,beta,ell,state");
    for (const auto& rec : result.terminal) {
      const auto ss = rec.ss.value_or(SsFractions{});
      const bool has_ss = rec.ss.has_value();
      terminal.row({std::to_string(rec.particle), std::to_string(rec.lineage),
                    csv::format_double(rec.reward), csv::format_double(rec.weight), rec.tokens,
                    has_ss ? csv::format_double(ss.alpha) : "", has_ss ? csv::format_double(ss.beta) : "",
                    has_ss ? csv::format_double(ss.ell) : "", join_values(state_values(rec.state))});
    }
    write_manifest(dir_ / "run_manifest.json", config_, mode_, &result);
  }

 private:
  const RunConfig& config_;
  std::string mode_;
  std::filesystem::path dir_;
  csv::Writer trajectory_;
  csv::Writer events_;
};

}  // namespace

double RunResult::mean_terminal_reward() const {
  if (terminal.empty()) return 0.0;
  double total = 0.0;
  for (const auto& rec : terminal) total += rec.reward;
  return total / static_cast<double>(terminal.size());
}

Engine::Engine(RunConfig config, std::shared_ptr<const Backend> backend,
               std::shared_ptr<const RewardPipeline> pipeline)
    : config_(std::move(config)), backend_(std::move(backend)), pipeline_(std::move(pipeline)) {
  validate(config_);
  if (backend_->steps() != config_.steps) {
    throw ConfigError("backend has T=" + std::to_string(backend_->steps()) + " but config has T=" +
                      std::to_string(config_.steps));
  }
}

Engine Engine::from_config(const RunConfig& config) {
  validate(config);
  std::shared_ptr<const Backend> backend = make_backend(config);
  auto spec = make_reward_spec(config);
  std::shared_ptr<WorkerClient> worker;
  if (spec.kind == RewardKind::external) worker = std::make_shared<WorkerClient>(spec.worker);
  auto pipeline = std::make_shared<const RewardPipeline>(std::move(spec), std::move(worker));
  return Engine(config, std::move(backend), std::move(pipeline));
}

RunResult Engine::run_steered() const { return run(true); }
RunResult Engine::run_unguided() const { return run(false); }

RunResult Engine::run(bool guided) const {
  const auto started = std::chrono::steady_clock::now();
  const auto& cfg = config_;
  const std::size_t n = cfg.n_particles;
  const int steps = backend_->steps();
  const auto spec = cfg.potential_spec();
  const auto schedule = cfg.schedule();
  const double uniform = 1.0 / static_cast<double>(n);

  Artifacts out(cfg, guided ? "steered" : "unguided");
  RunResult result;
  Ensemble& ens = result.ensemble;
  ens.resize(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    StreamRng rng(cfg.seed, Purpose::noise, i, steps);
    ens[i].state = backend_->sample_noise(rng);
    ens[i].parent = i;
    ens[i].root = i;
  });

  std::vector<RewardEvaluation> evals(n);
  auto evaluate_all = [&](int t) {
    parallel_for(n, cfg.threads, [&](std::size_t i) {
      const auto proxy = backend_->predict_x0(ens[i].state);
      evals[i] = pipeline_->evaluate(proxy, EvalKey{cfg.seed, i, t, cfg.run_id});
    });
  };

  auto emit_rows = [&](int t, std::span<const double> log_potentials, std::span<const double> weights,
                       bool applied) {
    if (!cfg.record_trajectory && !out.enabled()) return;
    for (std::size_t i = 0; i < n; ++i) {
      TrajectoryRow row;
      row.t = t;
      row.particle = i;
      row.reward = evals[i].value;
      row.scaled_reward = scale_reward(evals[i].value, spec);
      row.log_potential = applied ? log_potentials[i] : 0.0;
      row.weight = weights[i];
      row.ancestor = ens[i].parent;
      row.lineage = ens[i].root;
      row.reward_spread = evals[i].spread;
      row.guided = applied;
      if (evals[i].pair) row.tokens = evals[i].pair->tokens;
      if (cfg.snapshot_states) row.snapshot = state_values(ens[i].state);
      out.row(row);
      if (cfg.record_trajectory) result.log.rows.push_back(std::move(row));
    }
  };

  std::vector<double> log_weights(n);
  std::vector<double> applied(n);
  auto current_weights = [&] {
    for (std::size_t i = 0; i < n; ++i) log_weights[i] = ens[i].log_weight;
    return normalize_weights(log_weights);
  };

  for (int t = steps; t >= 0; --t) {
    const bool scheduled = t == 0 || should_resample(t, schedule);
    const bool log_only = !scheduled && cfg.log_every_step && t <= cfg.t_start;

    if (guided && scheduled) {
      evaluate_all(t);
      for (std::size_t i = 0; i < n; ++i) {
        auto& p = ens[i];
        p.history.record(t, scale_reward(evals[i].value, spec));
        const double lp = (t == 0 && spec.terminal_correction)
                              ? terminal_log_correction(p.history, spec)
                              : log_potential(p.history, spec, t);
        p.history.apply(lp);
        p.log_weight += lp;
        p.last_eval = evals[i];
        applied[i] = lp;
      }
      WeightVector w;
      try {
        w = current_weights();
      } catch (const DegenerateWeightsError& e) {
        throw DegenerateWeightsError(std::string(e.what()) + " at step t=" + std::to_string(t));
      }
      emit_rows(t, applied, w.weights, true);

      ResampleEvent event;
      event.t = t;
      event.ess = effective_sample_size(w);
      event.entropy = weight_entropy(w);
      for (double v : w.weights) {
        event.max_weight_deviation = std::max(event.max_weight_deviation, std::abs(v - uniform));
      }
      std::vector<std::size_t> ancestors;
      if (cfg.resample_method != ResampleMethod::none) {
        StreamRng rng(cfg.seed, Purpose::resample, 0, t);
        ens = resample(ens, w, cfg.resample_method, rng, &ancestors);
      } else {
        ancestors.resize(n);
        std::iota(ancestors.begin(), ancestors.end(), std::size_t{0});
      }
      event.multiplicity = multiplicities(ancestors, n);
      out.event(event);
      result.log.events.push_back(std::move(event));
      out.flush();
    } else if (scheduled || log_only) {
      evaluate_all(t);
      for (std::size_t i = 0; i < n; ++i) ens[i].last_eval = evals[i];
      const auto w = current_weights();
      emit_rows(t, applied, w.weights, false);
    }

    if (t > 0) {
      parallel_for(n, cfg.threads, [&](std::size_t i) {
        StreamRng rng(cfg.seed, Purpose::denoise, i, t);
        ens[i].state = backend_->denoise_step(ens[i].state, rng);
      });
    }
  }

  const auto final_weights = current_weights();
  result.terminal.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = ens[i];
    TerminalRecord rec;
    rec.particle = i;
    rec.lineage = p.root;
    rec.state = p.state;
    rec.weight = final_weights.weights[i];
    if (p.last_eval) {
      rec.reward = p.last_eval->value;
      if (p.last_eval->pair) {
        rec.tokens = p.last_eval->pair->tokens;
        rec.ss = classify_ss(p.last_eval->pair->coords);
      }
    }
    result.terminal.push_back(std::move(rec));
  }

  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.finish(result);
  return result;
}

RunResult run_steered(const RunConfig& config) { return Engine::from_config(config).run_steered(); }
RunResult run_unguided(const RunConfig& config) { return Engine::from_config(config).run_unguided(); }

void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    const std::string& mode, const RunResult* result) {
  nlohmann::ordered_json j;
  j["tool"] = "fksteer";
  j["version"] = FKSTEER_VERSION;
  j["mode"] = mode;
  j["seed"] = config.seed;
  j["kernels"] = std::string(simd::active().name);
  nlohmann::ordered_json echo;
  for (const auto& [key, value] : describe(config)) echo[key] = value;
  j["config"] = std::move(echo);
  j["status"] = result ? "complete" : "running";
  if (result) {
    j["terminal_mean_reward"] = result->mean_terminal_reward();
    j["resample_events"] = result->log.events.size();
    j["elapsed_seconds"] = result->seconds;
  }
  std::ofstream out(path);
  if (!out) throw RunError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace fks
