#include "fksteer/reporting.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "fksteer/csv.hpp"
#include "fksteer/error.hpp"

namespace fks {
namespace {

std::vector<StepStats> stats_by_step(const std::map<int, std::vector<double>, std::greater<>>& groups) {
  std::vector<StepStats> out;
  out.reserve(groups.size());
  for (const auto& [t, values] : groups) {
    StepStats s;
    s.t = t;
    s.count = values.size();
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(sq / static_cast<double>(values.size()));
    out.push_back(s);
  }
  return out;
}

std::unordered_map<std::string, std::size_t> header_index(const std::string& line) {
  std::unordered_map<std::string, std::size_t> index;
  auto names = csv::split(line);
  for (std::size_t i = 0; i < names.size(); ++i) index[std::string(csv::trim(names[i]))] = i;
  return index;
}

std::size_t column(const std::unordered_map<std::string, std::size_t>& index, const std::string& name,
                   const std::filesystem::path& path) {
  auto it = index.find(name);
  if (it == index.end()) throw ConfigError(path.string() + ": missing column '" + name + "'");
  return it->second;
}

double to_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

std::vector<double> to_values(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : csv::split(s, ' ')) {
    if (!part.empty()) out.push_back(std::stod(part));
  }
  return out;
}

}  // namespace

double sequence_diversity(const std::vector<std::string>& tokens) {
  if (tokens.size() < 2) throw std::invalid_argument("sequence_diversity needs at least two strings");
  const std::size_t len = tokens.front().size();
  for (const auto& s : tokens) {
    if (s.size() != len) throw std::invalid_argument("sequence_diversity: ragged string lengths");
  }
  if (len == 0) return 0.0;
  double identity = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      std::size_t same = 0;
      for (std::size_t k = 0; k < len; ++k) same += tokens[i][k] == tokens[j][k];
      identity += static_cast<double>(same) / static_cast<double>(len);
      ++pairs;
    }
  }
  return 1.0 - identity / static_cast<double>(pairs);
}

RewardTrajectoryTable reward_trajectory_table(const TrajectoryLog& log) {
  RewardTrajectoryTable table;
  table.rows = log.rows;
  std::map<int, std::vector<double>, std::greater<>> groups;
  for (const auto& row : log.rows) groups[row.t].push_back(row.reward);
  table.per_step = stats_by_step(groups);
  return table;
}

std::vector<StepStats> reward_spread_by_step(const TrajectoryLog& log) {
  std::map<int, std::vector<double>, std::greater<>> groups;
  for (const auto& row : log.rows) groups[row.t].push_back(row.reward_spread);
  auto stats = stats_by_step(groups);
  return stats;
}

std::vector<DiversityPoint> diversity_curve(const TrajectoryLog& log) {
  std::map<int, std::vector<std::string>, std::greater<>> groups;
  for (const auto& row : log.rows) {
    if (!row.tokens.empty()) groups[row.t].push_back(row.tokens);
  }
  std::vector<DiversityPoint> out;
  for (const auto& [t, tokens] : groups) {
    if (tokens.size() >= 2) out.push_back({t, sequence_diversity(tokens)});
  }
  return out;
}

double terminal_diversity(const std::vector<TerminalRecord>& terminal) {
  std::vector<std::string> tokens;
  for (const auto& rec : terminal) {
    if (!rec.tokens.empty()) tokens.push_back(rec.tokens);
  }
  if (tokens.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return sequence_diversity(tokens);
}

std::vector<SsFractions> ss_composition_table(const std::vector<TerminalRecord>& terminal) {
  std::vector<SsFractions> out;
  for (const auto& rec : terminal) {
    if (rec.ss) out.push_back(*rec.ss);
  }
  return out;
}

void write_diversity_csv(const std::filesystem::path& path, const std::vector<DiversityPoint>& curve) {
  csv::Writer out(path, "t,diversity");
  for (const auto& p : curve) out.row({std::to_string(p.t), csv::format_double(p.diversity)});
}

void write_rewards_long_csv(const std::filesystem::path& path, const RewardTrajectoryTable& table) {
  std::map<int, StepStats> by_t;
  for (const auto& s : table.per_step) by_t[s.t] = s;
  csv::Writer out(path, "t,particle,reward,ancestor,lineage,guided,step_mean,step_sd");
  for (const auto& row : table.rows) {
    const auto& s = by_t[row.t];
    out.row({std::to_string(row.t), std::to_string(row.particle), csv::format_double(row.reward),
             std::to_string(row.ancestor), std::to_string(row.lineage), row.guided ? "1" : "0",
             csv::format_double(s.mean), csv::format_double(s.sd)});
  }
}

void write_ss_fractions_csv(const std::filesystem::path& path, const std::vector<SsFractions>& rows) {
  csv::Writer out(path, "design,alpha,beta,ell");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row({std::to_string(i), csv::format_double(rows[i].alpha), csv::format_double(rows[i].beta),
             csv::format_double(rows[i].ell)});
  }
}

TrajectoryLog read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + " is empty");
  const auto index = header_index(line);
  const auto c_t = column(index, "t", path), c_p = column(index, "particle", path),
             c_r = column(index, "reward", path), c_w = column(index, "weight", path),
             c_a = column(index, "ancestor", path);
  const auto opt = [&](const std::string& name) {
    auto it = index.find(name);
    return it == index.end() ? std::size_t(-1) : it->second;
  };
  const auto c_s = opt("scaled_reward"), c_lp = opt("log_potential"), c_l = opt("lineage"),
             c_sd = opt("reward_sd"), c_g = opt("guided"), c_tok = opt("tokens"), c_st = opt("state");
  TrajectoryLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = csv::split(line);
    auto get = [&](std::size_t c) { return c < f.size() ? f[c] : std::string(); };
    TrajectoryRow row;
    row.t = std::stoi(get(c_t));
    row.particle = std::stoul(get(c_p));
    row.reward = to_double(get(c_r));
    row.weight = to_double(get(c_w));
    row.ancestor = std::stoul(get(c_a));
    if (c_s != std::size_t(-1)) row.scaled_reward = to_double(get(c_s));
    if (c_lp != std::size_t(-1)) row.log_potential = to_double(get(c_lp));
    row.lineage = c_l != std::size_t(-1) ? std::stoul(get(c_l)) : row.ancestor;
    if (c_sd != std::size_t(-1)) row.reward_spread = to_double(get(c_sd));
    if (c_g != std::size_t(-1)) row.guided = get(c_g) == "1";
    if (c_tok != std::size_t(-1)) row.tokens = get(c_tok);
    if (c_st != std::size_t(-1)) row.snapshot = to_values(get(c_st));
    log.rows.push_back(std::move(row));
  }
  return log;
}

std::vector<TerminalRecord> read_terminal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + " is empty");
  const auto index = header_index(line);
  const auto c_p = column(index, "particle", path), c_l = column(index, "lineage", path),
             c_r = column(index, "reward", path), c_w = column(index, "weight", path),
             c_tok = column(index, "tokens", path), c_a = column(index, "alpha", path),
             c_b = column(index, "beta", path), c_e = column(index, "ell", path);
  std::vector<TerminalRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = csv::split(line);
    auto get = [&](std::size_t c) { return c < f.size() ? f[c] : std::string(); };
    TerminalRecord rec;
    rec.particle = std::stoul(get(c_p));
    rec.lineage = std::stoul(get(c_l));
    rec.reward = to_double(get(c_r));
    rec.weight = to_double(get(c_w));
    rec.tokens = get(c_tok);
    if (!get(c_a).empty()) {
      rec.ss = SsFractions{to_double(get(c_a)), to_double(get(c_b)), to_double(get(c_e))};
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_report(const std::filesystem::path& out, const TrajectoryLog& log,
                  const std::vector<TerminalRecord>& terminal) {
  std::filesystem::create_directories(out);
  write_diversity_csv(out / "diversity.csv", diversity_curve(log));
  write_rewards_long_csv(out / "rewards_long.csv", reward_trajectory_table(log));
  write_ss_fractions_csv(out / "ss_fractions.csv", ss_composition_table(terminal));
}

}  // namespace fks
