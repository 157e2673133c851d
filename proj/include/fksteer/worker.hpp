#pragma once

// External reward worker protocol.
//
// The worker is a subprocess speaking line-delimited JSON over its standard
// streams. After start-up the client sends one handshake line
//   {"hello":"fksteer-reward/1","run_id":"..."}
// and expects {"ready":true}. Each reward request is one line
//   {"run_id":..,"particle_id":..,"t":..,"eval_index":..,"payload":{...}}
// with payload {"coords":[x0,y0,x1,y1,...],"tokens":"KRDE..."} for chain
// proxies or {"state":[...]} otherwise, answered by exactly one line
//   {"particle_id":..,"t":..,"eval_index":..,"reward":<float>}.

#include <sys/types.h>

#include <cstddef>
#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include "fksteer/error.hpp"

namespace fks {

inline constexpr const char* kWorkerProtocol = "fksteer-reward/1";

enum class WorkerFailure { crash, malformed, timeout };

std::string to_string(WorkerFailure failure);

class WorkerError : public RunError {
 public:
  WorkerError(WorkerFailure failure, std::size_t particle_id, int t, const std::string& detail);

  WorkerFailure failure() const { return failure_; }
  std::size_t particle_id() const { return particle_id_; }
  int step() const { return t_; }

 private:
  WorkerFailure failure_;
  std::size_t particle_id_;
  int t_;
};

struct WorkerOptions {
  std::string command;
  int timeout_ms = 10000;
  std::string run_id = "run";
};

struct WorkerPayload {
  std::vector<double> coords;
  std::string tokens;
  std::vector<double> state;
};

struct WorkerRequest {
  std::string run_id;
  std::size_t particle_id = 0;
  int t = 0;
  std::size_t eval_index = 0;
  WorkerPayload payload;
};

struct WorkerReply {
  std::size_t particle_id = 0;
  int t = 0;
  std::size_t eval_index = 0;
  double reward = 0.0;
};

std::string encode_request(const WorkerRequest& request);
// Throws std::invalid_argument on anything that is not a well-formed reply.
WorkerReply decode_reply(const std::string& line);

// Owns one worker subprocess. request() is serialized internally, so a client
// may be shared across threads.
class WorkerClient {
 public:
  explicit WorkerClient(WorkerOptions options);
  ~WorkerClient();

  WorkerClient(const WorkerClient&) = delete;
  WorkerClient& operator=(const WorkerClient&) = delete;

  double request(const WorkerRequest& request);

  const WorkerOptions& options() const { return options_; }
  pid_t pid() const { return pid_; }
  // SIGKILL the worker (used to exercise the failure path).
  void kill_worker();

 private:
  // Returns false on EOF/timeout; `timed_out` tells which.
  bool read_line(std::string& line, bool& timed_out);
  bool write_line(const std::string& line);

  WorkerOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::mutex mutex_;
};

struct EchoWorkerOptions {
  enum class Mode { zero, charge };
  Mode mode = Mode::zero;
  int q_star = 0;
  // Exit without replying after this many reward requests (-1: never).
  long die_after = -1;
};

// Serves the protocol on the given streams until EOF. Returns a process exit code.
int serve_echo_worker(std::istream& in, std::ostream& out, const EchoWorkerOptions& options);

}  // namespace fks
