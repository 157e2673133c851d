#include "fksteer/worker.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace fks {

using nlohmann::json;

std::string to_string(WorkerFailure failure) {
  switch (failure) {
    case WorkerFailure::crash:
      return "crash";
    case WorkerFailure::malformed:
      return "malformed";
    case WorkerFailure::timeout:
      return "timeout";
  }
  return "unknown";
}

WorkerError::WorkerError(WorkerFailure failure, std::size_t particle_id, int t,
                         const std::string& detail)
    : RunError("reward worker " + to_string(failure) + " (particle " + std::to_string(particle_id) +
               ", step t=" + std::to_string(t) + "): " + detail),
      failure_(failure),
      particle_id_(particle_id),
      t_(t) {}

std::string encode_request(const WorkerRequest& request) {
  json payload = json::object();
  if (!request.payload.coords.empty() || !request.payload.tokens.empty()) {
    payload["coords"] = request.payload.coords;
    payload["tokens"] = request.payload.tokens;
  } else {
    payload["state"] = request.payload.state;
  }
  const json j = {{"run_id", request.run_id},
                  {"particle_id", request.particle_id},
                  {"t", request.t},
                  {"eval_index", request.eval_index},
                  {"payload", std::move(payload)}};
  return j.dump();
}

WorkerReply decode_reply(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("unparseable reply: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("reply is not a JSON object");
  for (const char* key : {"particle_id", "t", "eval_index", "reward"}) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw std::invalid_argument(std::string("reply lacks numeric field '") + key + "'");
    }
  }
  if (!j["particle_id"].is_number_integer() || !j["t"].is_number_integer() ||
      !j["eval_index"].is_number_integer()) {
    throw std::invalid_argument("reply id fields must be integers");
  }
  WorkerReply reply;
  reply.particle_id = j["particle_id"].get<std::size_t>();
  reply.t = j["t"].get<int>();
  reply.eval_index = j["eval_index"].get<std::size_t>();
  reply.reward = j["reward"].get<double>();
  return reply;
}

WorkerClient::WorkerClient(WorkerOptions options) : options_(std::move(options)) {
  if (options_.command.empty()) throw ConfigError("worker_command is empty");
  ::signal(SIGPIPE, SIG_IGN);

  int down[2];
  int up[2];
  if (::pipe2(down, O_CLOEXEC) != 0 || ::pipe2(up, O_CLOEXEC) != 0) {
    throw RunError(std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = ::fork();
  if (pid_ < 0) throw RunError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::dup2(down[0], STDIN_FILENO);
    ::dup2(up[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", options_.command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(down[0]);
  ::close(up[1]);
  to_child_ = down[1];
  from_child_ = up[0];

  const json hello = {{"hello", kWorkerProtocol}, {"run_id", options_.run_id}};
  std::string line;
  bool timed_out = false;
  if (!write_line(hello.dump()) || !read_line(line, timed_out)) {
    throw WorkerError(timed_out ? WorkerFailure::timeout : WorkerFailure::crash, 0, -1,
                      "no handshake from '" + options_.command + "'");
  }
  try {
    const auto reply = json::parse(line);
    if (!reply.is_object() || reply.value("ready", false) != true) throw std::invalid_argument("not ready");
  } catch (const std::exception&) {
    throw WorkerError(WorkerFailure::malformed, 0, -1, "bad handshake reply: " + line);
  }
}

WorkerClient::~WorkerClient() {
  if (to_child_ >= 0) ::close(to_child_);
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) {
        pid_ = -1;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }
  if (from_child_ >= 0) ::close(from_child_);
}

void WorkerClient::kill_worker() {
  std::lock_guard lock(mutex_);
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

bool WorkerClient::write_line(const std::string& line) {
  std::string data = line + '\n';
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool WorkerClient::read_line(std::string& line, bool& timed_out) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::milliseconds(options_.timeout_ms);
  timed_out = false;
  while (true) {
    const auto pos = buffer_.find('\n');
    if (pos != std::string::npos) {
      line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return true;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (remaining <= 0) {
      timed_out = true;
      return false;
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining));
    if (ready < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    if (ready == 0) {
      timed_out = true;
      return false;
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

double WorkerClient::request(const WorkerRequest& request) {
  std::lock_guard lock(mutex_);
  if (pid_ <= 0) {
    throw WorkerError(WorkerFailure::crash, request.particle_id, request.t, "worker is not running");
  }
  if (!write_line(encode_request(request))) {
    throw WorkerError(WorkerFailure::crash, request.particle_id, request.t,
                      std::string("write failed: ") + std::strerror(errno));
  }
  std::string line;
  bool timed_out = false;
  if (!read_line(line, timed_out)) {
    if (timed_out) {
      throw WorkerError(WorkerFailure::timeout, request.particle_id, request.t,
                        "no reply within " + std::to_string(options_.timeout_ms) + " ms");
    }
    throw WorkerError(WorkerFailure::crash, request.particle_id, request.t,
                      "worker closed its output");
  }
  WorkerReply reply;
  try {
    reply = decode_reply(line);
  } catch (const std::invalid_argument& e) {
    throw WorkerError(WorkerFailure::malformed, request.particle_id, request.t, e.what());
  }
  if (reply.particle_id != request.particle_id || reply.t != request.t ||
      reply.eval_index != request.eval_index) {
    throw WorkerError(WorkerFailure::malformed, request.particle_id, request.t,
                      "reply ids do not match the request");
  }
  if (std::isnan(reply.reward)) {
    throw WorkerError(WorkerFailure::malformed, request.particle_id, request.t, "reward is NaN");
  }
  return reply.reward;
}

namespace {

// The worker keeps its own charge table so the round trip checks two implementations.
int worker_net_charge(const std::string& tokens) {
  int q = 0;
  for (char c : tokens) {
    if (c == 'K' || c == 'R') ++q;
    if (c == 'D' || c == 'E') --q;
  }
  return q;
}

}  // namespace

int serve_echo_worker(std::istream& in, std::ostream& out, const EchoWorkerOptions& options) {
  std::string line;
  long served = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      return 2;
    }
    if (j.contains("hello")) {
      out << json{{"ready", true}, {"protocol", kWorkerProtocol}}.dump() << '\n' << std::flush;
      continue;
    }
    if (options.die_after >= 0 && served >= options.die_after) return 3;
    double reward = 0.0;
    if (options.mode == EchoWorkerOptions::Mode::charge) {
      const auto tokens = j["payload"].value("tokens", std::string());
      reward = -std::abs(static_cast<double>(worker_net_charge(tokens) - options.q_star));
    }
    const json reply = {{"particle_id", j.value("particle_id", 0)},
                        {"t", j.value("t", 0)},
                        {"eval_index", j.value("eval_index", 0)},
                        {"reward", reward}};
    out << reply.dump() << '\n' << std::flush;
    ++served;
  }
  return 0;
}

}  // namespace fks
