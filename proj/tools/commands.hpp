#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fks::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitTolerance = 3;

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<unsigned long long> seed;
};

struct RunArgs {
  CommonArgs common;
  bool baseline = false;
};

struct SweepArgs {
  CommonArgs common;
  std::string axis;
  std::vector<std::string> values;
  std::size_t seeds = 3;
  bool baseline = false;
  bool stop_on_error = false;
};

struct OracleArgs {
  CommonArgs common;
  double tolerance = 0.02;
};

struct ReportArgs {
  std::string run_dir;
  std::string out;
};

struct EchoArgs {
  std::string reward = "zero";
  int q_star = 0;
  int die_after = -1;
};

int cmd_run(const RunArgs& args);
int cmd_sweep(const SweepArgs& args);
int cmd_oracle(const OracleArgs& args);
int cmd_report(const ReportArgs& args);
int cmd_worker_echo(const EchoArgs& args);

// Prints a one-line JSON error record to stderr and returns the exit code.
int report_error(const std::string& kind, const std::string& message, int code,
                 const std::string& extra_json = "");

}  // namespace fks::cli
