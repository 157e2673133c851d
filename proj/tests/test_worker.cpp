#include <gtest/gtest.h>

#include "json.hpp"
#include <sstream>

#include "fksteer/rewards.hpp"
#include "fksteer/worker.hpp"

namespace {

using namespace fks;

std::string echo_command(const std::string& extra = "") {
  return std::string(FKSTEER_CLI_PATH) + " worker-echo" + extra;
}

WorkerRequest sample_request() {
  WorkerRequest r;
  r.run_id = "abc";
  r.particle_id = 7;
  r.t = 12;
  r.eval_index = 3;
  r.payload.coords = {0.0, 1.0, 2.5, -1.0};
  r.payload.tokens = "KD";
  return r;
}

TEST(Protocol, RequestCarriesAllFields) {
  const auto j = nlohmann::json::parse(encode_request(sample_request()));
  EXPECT_EQ(j["run_id"], "abc");
  EXPECT_EQ(j["particle_id"], 7);
  EXPECT_EQ(j["t"], 12);
  EXPECT_EQ(j["eval_index"], 3);
  EXPECT_EQ(j["payload"]["tokens"], "KD");
  EXPECT_EQ(j["payload"]["coords"].size(), 4u);
  EXPECT_EQ(encode_request(sample_request()).find('\n'), std::string::npos);
}

TEST(Protocol, DecodeReply) {
  const auto r = decode_reply(R"({"particle_id":7,"t":12,"eval_index":3,"reward":-1.5})");
  EXPECT_EQ(r.particle_id, 7u);
  EXPECT_EQ(r.t, 12);
  EXPECT_EQ(r.eval_index, 3u);
  EXPECT_EQ(r.reward, -1.5);
  EXPECT_THROW(decode_reply("not json"), std::invalid_argument);
  EXPECT_THROW(decode_reply("[1,2]"), std::invalid_argument);
  EXPECT_THROW(decode_reply(R"({"particle_id":7,"t":12,"eval_index":3})"), std::invalid_argument);
  EXPECT_THROW(decode_reply(R"({"particle_id":"x","t":12,"eval_index":3,"reward":1})"), std::invalid_argument);
}

TEST(Protocol, DoublesSurviveTheRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e308, 6.02214076e23}) {
    nlohmann::json j = {{"particle_id", 0}, {"t", 0}, {"eval_index", 0}, {"reward", v}};
    EXPECT_EQ(decode_reply(j.dump()).reward, v);
  }
}

TEST(EchoWorker, ServesInProcess) {
  std::istringstream in(std::string(R"({"hello":"fksteer-reward/1","run_id":"x"})") + "\n" +
                        encode_request(sample_request()) + "\n");
  std::ostringstream out;
  EchoWorkerOptions options;
  options.mode = EchoWorkerOptions::Mode::charge;
  options.q_star = 2;
  EXPECT_EQ(serve_echo_worker(in, out, options), 0);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(nlohmann::json::parse(line)["ready"], true);
  std::getline(lines, line);
  const auto reply = decode_reply(line);
  EXPECT_EQ(reply.particle_id, 7u);
  EXPECT_EQ(reply.reward, -2.0);
}

TEST(WorkerClient, SubprocessRoundTrip) {
  WorkerClient client({echo_command(" --reward charge --q-star 1"), 5000, "rt"});
  auto req = sample_request();
  req.payload.tokens = "KKD";
  EXPECT_EQ(client.request(req), 0.0);
  req.payload.tokens = "DDDD";
  EXPECT_EQ(client.request(req), -5.0);
}

TEST(WorkerClient, KilledWorkerIsACrash) {
  WorkerClient client({echo_command(), 5000, "kill"});
  EXPECT_EQ(client.request(sample_request()), 0.0);
  client.kill_worker();
  try {
    client.request(sample_request());
    FAIL() << "expected WorkerError";
  } catch (const WorkerError& e) {
    EXPECT_EQ(e.failure(), WorkerFailure::crash);
    EXPECT_EQ(e.particle_id(), 7u);
    EXPECT_EQ(e.step(), 12);
  }
}

TEST(WorkerClient, WorkerExitingMidRunIsACrash) {
  WorkerClient client({echo_command(" --die-after 2"), 5000, "die"});
  client.request(sample_request());
  client.request(sample_request());
  EXPECT_THROW(client.request(sample_request()), WorkerError);
}

TEST(WorkerClient, SilentWorkerTimesOut) {
  try {
    WorkerClient client({"sleep 5", 200, "slow"});
    FAIL() << "expected WorkerError";
  } catch (const WorkerError& e) {
    EXPECT_EQ(e.failure(), WorkerFailure::timeout);
  }
}

TEST(WorkerClient, GarbageHandshakeIsMalformed) {
  try {
    WorkerClient client({"echo hello", 2000, "bad"});
    FAIL() << "expected WorkerError";
  } catch (const WorkerError& e) {
    EXPECT_EQ(e.failure(), WorkerFailure::malformed);
  }
}

TEST(WorkerClient, MissingCommandIsACrash) {
  EXPECT_THROW(WorkerClient({"/nonexistent/worker", 2000, "x"}), WorkerError);
}

TEST(WorkerClient, ExternalRewardMatchesInProcessCharge) {
  RewardPipelineSpec spec;
  spec.kind = RewardKind::external;
  spec.n_evals = 2;
  auto worker = std::make_shared<WorkerClient>(WorkerOptions{echo_command(" --reward charge --q-star 3"), 5000, "x"});
  RewardPipeline external(spec, worker);
  spec.kind = RewardKind::charge;
  spec.q_star = 3;
  RewardPipeline local(spec);
  StreamRng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xy(24);
    for (auto& v : xy) v = 2.0 * rng.normal();
    const DenoisedProxy proxy{DenoisedProxy::Kind::chain, xy, 5};
    const EvalKey key{1, static_cast<std::size_t>(rep), 5, "x"};
    EXPECT_EQ(external.evaluate(proxy, key).per_eval, local.evaluate(proxy, key).per_eval);
  }
}

}  // namespace
