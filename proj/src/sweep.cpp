#include "fksteer/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fksteer/csv.hpp"
#include "fksteer/engine.hpp"
#include "fksteer/error.hpp"
#include "fksteer/reporting.hpp"

namespace fks {
namespace {

std::string cell_label(const std::string& axis, const std::string& value, std::uint64_t seed) {
  return axis + "=" + value + " seed=" + std::to_string(seed);
}

std::string optional_number(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

}  // namespace

const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"n_particles", "tau", "t_start", "dt", "potential", "n_evals"};
  return axes;
}

std::vector<SweepSummary> SweepReport::summary() const {
  std::vector<SweepSummary> out;
  for (const auto& cell : cells) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.value == cell.value; });
    if (it == out.end()) {
      out.push_back({});
      out.back().value = cell.value;
      it = std::prev(out.end());
    }
    ++it->runs;
    if (!cell.ok) ++it->failed;
  }
  for (auto& s : out) {
    std::vector<double> rewards, diversity, baseline;
    for (const auto& cell : cells) {
      if (cell.value != s.value || !cell.ok) continue;
      rewards.push_back(cell.mean_reward);
      if (!std::isnan(cell.diversity)) diversity.push_back(cell.diversity);
      if (cell.baseline_reward) baseline.push_back(*cell.baseline_reward);
    }
    const auto mean = [](const std::vector<double>& v) {
      if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
      double total = 0.0;
      for (double x : v) total += x;
      return total / static_cast<double>(v.size());
    };
    s.mean_reward = mean(rewards);
    s.mean_diversity = mean(diversity);
    double sq = 0.0;
    for (double r : rewards) sq += (r - s.mean_reward) * (r - s.mean_reward);
    s.sd_reward = rewards.size() > 1 ? std::sqrt(sq / static_cast<double>(rewards.size() - 1)) : 0.0;
    if (!baseline.empty()) s.baseline_reward = mean(baseline);
  }
  return out;
}

bool SweepReport::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.ok; });
}

SweepReport run_sweep(const RunConfig& base, const std::string& axis,
                      const std::vector<std::string>& values, const SweepOptions& options) {
  const auto& axes = sweep_axes();
  if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
    std::string allowed;
    for (const auto& a : axes) allowed += (allowed.empty() ? "" : ", ") + a;
    throw ConfigError("unknown sweep axis '" + axis + "' (allowed: " + allowed + ")");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (options.seeds == 0) throw ConfigError("sweep needs at least one seed");

  std::vector<RunConfig> configs;
  for (const auto& value : values) {
    RunConfig config = base;
    apply_setting(config, axis, value);
    try {
      validate(config);
    } catch (const ConfigError& e) {
      throw ConfigError(axis + "=" + value + ": " + e.what());
    }
    configs.push_back(std::move(config));
  }

  SweepReport report;
  report.axis = axis;
  for (std::size_t v = 0; v < values.size(); ++v) {
    for (std::size_t k = 0; k < options.seeds; ++k) {
      RunConfig config = configs[v];
      config.seed = base.seed + k;
      config.record_trajectory = false;
      const std::filesystem::path cell_dir =
          base.out.empty() ? std::filesystem::path()
                           : std::filesystem::path(base.out) / (axis + "=" + values[v]) /
                                 ("seed" + std::to_string(config.seed));
      config.out = cell_dir.empty() ? std::string() : (cell_dir / "steered").string();

      SweepCell cell;
      cell.value = values[v];
      cell.seed = config.seed;
      try {
        const auto steered = run_steered(config);
        cell.mean_reward = steered.mean_terminal_reward();
        cell.diversity = terminal_diversity(steered.terminal);
        cell.seconds = steered.seconds;
        if (options.baseline) {
          RunConfig plain = config;
          plain.out = cell_dir.empty() ? std::string() : (cell_dir / "unguided").string();
          const auto unguided = run_unguided(plain);
          cell.baseline_reward = unguided.mean_terminal_reward();
          cell.baseline_diversity = terminal_diversity(unguided.terminal);
        }
        cell.ok = true;
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        cell.error = cell_label(axis, values[v], config.seed) + ": " + e.what();
        if (!options.continue_on_error) throw RunError(cell.error);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

void write_sweep_csv(const std::filesystem::path& dir, const SweepReport& report) {
  std::filesystem::create_directories(dir);
  {
    csv::Writer out(dir / "cells.csv",
                    report.axis + ",seed,status,mean_reward,diversity,baseline_reward,baseline_diversity,seconds,error");
    for (const auto& c : report.cells) {
      std::string error = c.error;
      std::replace(error.begin(), error.end(), ',', ';');
      std::replace(error.begin(), error.end(), '\n', ' ');
      out.row({c.value, std::to_string(c.seed), c.ok ? "ok" : "failed",
               c.ok ? csv::format_double(c.mean_reward) : "", c.ok ? csv::format_double(c.diversity) : "",
               optional_number(c.baseline_reward), optional_number(c.baseline_diversity),
               csv::format_double(c.seconds), error});
    }
  }
  csv::Writer out(dir / "summary.csv",
                  report.axis + ",runs,failed,mean_reward,sd_reward,mean_diversity,baseline_reward");
  for (const auto& s : report.summary()) {
    out.row({s.value, std::to_string(s.runs), std::to_string(s.failed), csv::format_double(s.mean_reward),
             csv::format_double(s.sd_reward), csv::format_double(s.mean_diversity),
             optional_number(s.baseline_reward)});
  }
}

}  // namespace fks
