#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "slicesim/compute.hpp"

using namespace slicesim;

namespace {

ModelProfile profile(const std::string& name, int64_t warm_us, int64_t cold_us, double alpha,
                     double beta) {
  ModelProfile m;
  m.name = name;
  m.warm_base_us = warm_us;
  m.cold_extra_us = cold_us;
  m.alpha_us_per_input_token = alpha;
  m.beta_us_per_output_token = beta;
  return m;
}

std::map<std::string, ModelProfile> two_models() {
  return {{"llava", profile("llava", 200'000, 5'000'000, 200.0, 30'000.0)},
          {"llama3.2", profile("llama3.2", 100'000, 2'000'000, 100.0, 15'000.0)}};
}

Session make_session(int id, const std::string& model, int in_tok = 100, int out_tok = 150) {
  Session s;
  s.request_id = id;
  s.model = model;
  s.input_tokens = in_tok;
  s.output_tokens = out_tok;
  s.uplink_done_us = 0;
  s.status = SessionStatus::queued;
  return s;
}

}  // namespace

TEST_CASE("inference time is base plus per-token terms") {
  ModelProfile m = profile("llava", 200'000, 5'000'000, 200.0, 30'000.0);
  CHECK(inference_time_us(m, false, 100, 150) == 4'720'000);
  CHECK(inference_time_us(m, false, 0, 0) == 200'000);       // base only
  CHECK(inference_time_us(m, true, 0, 0) == 5'200'000);      // cold adds exactly cold_extra
  CHECK(inference_time_us(m, true, 100, 150) == 9'720'000);
}

TEST_CASE("an idle server starts inference immediately") {
  LlmServer server({}, two_models());
  Session s = make_session(1, "llava");
  REQUIRE(server.enqueue(&s, 10'000));
  CHECK(s.inference_start_us == 10'000);
  CHECK(s.status == SessionStatus::inferring);
  CHECK(s.cold_start);  // nothing loaded yet
}

TEST_CASE("a busy gpu queues the next session and chains it exactly") {
  LlmServer server({}, two_models());
  Session a = make_session(1, "llava");   // cold: 5.2M + 20k + 4.5M = 9.72M us
  Session b = make_session(2, "llava");
  REQUIRE(server.enqueue(&a, 0));
  REQUIRE(server.enqueue(&b, 1'000));
  CHECK(b.status == SessionStatus::queued);
  CHECK(server.queued_count() == 1);

  // b must wait the full residual; it starts the instant a finishes
  auto done = server.advance(9'720'000);
  REQUIRE(done.size() == 1);
  CHECK(done[0] == &a);
  CHECK(a.inference_done_us == 9'720'000);
  CHECK(b.inference_start_us == 9'720'000);
  CHECK(b.inference_start_us - b.uplink_done_us >= 3'000'000);  // waited >= 3 s
  CHECK(b.cold_start == false);  // same model stays warm

  // warm run: 200k + 20k + 4.5M
  done = server.advance(9'720'000 + 4'720'000);
  REQUIRE(done.size() == 1);
  CHECK(done[0] == &b);
  CHECK(b.inference_done_us == 14'440'000);
}

TEST_CASE("the sixty-fifth concurrent session overflows the default queue") {
  LlmServer server({}, two_models());
  std::vector<Session> pool(65);
  for (int i = 0; i < 65; ++i) pool[i] = make_session(i, "llava");
  for (int i = 0; i < 64; ++i) REQUIRE(server.enqueue(&pool[i], 0));
  CHECK(server.concurrent_count() == 64);
  CHECK_FALSE(server.enqueue(&pool[64], 0));
  CHECK(server.concurrent_count() == 64);
}

TEST_CASE("alternating models pay the cold start every time") {
  LlmServer server({}, two_models());
  std::vector<Session> pool;
  pool.reserve(6);
  for (int i = 0; i < 6; ++i)
    pool.push_back(make_session(i, i % 2 == 0 ? "llava" : "llama3.2", 10, 10));
  int64_t now = 0;
  for (int i = 0; i < 6; ++i) {
    REQUIRE(server.enqueue(&pool[i], now));
    auto done = server.advance(now + 60'000'000);
    REQUIRE(done.size() == 1);
    CHECK(done[0]->cold_start);
    now = done[0]->inference_done_us;
  }
}

TEST_CASE("back-to-back same-model sessions are warm after the first") {
  LlmServer server({}, two_models());
  std::vector<Session> pool;
  pool.reserve(4);
  for (int i = 0; i < 4; ++i) pool.push_back(make_session(i, "llama3.2", 10, 10));
  int64_t now = 0;
  for (int i = 0; i < 4; ++i) {
    REQUIRE(server.enqueue(&pool[i], now));
    auto done = server.advance(now + 60'000'000);
    REQUIRE(done.size() == 1);
    CHECK(done[0]->cold_start == (i == 0));
    now = done[0]->inference_done_us;
  }
}

TEST_CASE("fifo order is preserved under a backlog") {
  LlmServer server({}, two_models());
  std::vector<Session> pool;
  pool.reserve(5);
  for (int i = 0; i < 5; ++i) pool.push_back(make_session(i, "llama3.2", 1, 1));
  for (int i = 0; i < 5; ++i) REQUIRE(server.enqueue(&pool[i], 0));
  auto done = server.advance(600'000'000);
  REQUIRE(done.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(done[i]->request_id == i);
  for (int i = 1; i < 5; ++i)
    CHECK(done[i]->inference_start_us == done[i - 1]->inference_done_us);
}

TEST_CASE("gpu utilization is the busy fraction of the window") {
  LlmServer server({}, two_models());
  CHECK(server.gpu_utilization(10'000'000, 10'000'000) == doctest::Approx(0.0));

  // llama3.2 warm minus: cold first: 2M + 100k + 1k*100 + 10*15k... use exact:
  // cold inference of (10, 10): 2'000'000 + 100'000 + 1'000 + 150'000 = 2'251'000
  Session s = make_session(1, "llama3.2", 10, 10);
  REQUIRE(server.enqueue(&s, 0));
  server.advance(2'251'000);
  CHECK(s.inference_done_us == 2'251'000);
  CHECK(server.gpu_utilization(2'251'000, 2'251'000) == doctest::Approx(1.0));

  // exactly 3 s busy inside a 10 s window: warm 100k + 6500*100 + 150*15k
  Session t = make_session(2, "llama3.2", 6'500, 150);
  int64_t start = 20'000'000;
  REQUIRE(server.enqueue(&t, start));
  server.advance(60'000'000);
  CHECK(t.inference_done_us == start + 3'000'000);
  double util = server.gpu_utilization(start + 10'000'000, 10'000'000);
  CHECK(util == doctest::Approx(0.3));
  CHECK(server.cumulative_busy_us(60'000'000) == 2'251'000 + 3'000'000);
}

TEST_CASE("utilization windows are additive") {
  LlmServer server({}, two_models());
  Session s = make_session(1, "llama3.2", 100, 100);
  REQUIRE(server.enqueue(&s, 0));
  server.advance(600'000'000);
  int64_t end = s.inference_done_us;
  double whole = server.gpu_utilization(end, end);
  double a = server.gpu_utilization(end / 2, end / 2);
  double b = server.gpu_utilization(end, end - end / 2);
  double merged = (a * (end / 2) + b * (end - end / 2)) / static_cast<double>(end);
  CHECK(merged == doctest::Approx(whole).epsilon(1e-9));
}

TEST_CASE("two gpus run two inferences concurrently") {
  ServerConfig cfg;
  cfg.n_gpus = 2;
  LlmServer server(cfg, two_models());
  Session a = make_session(1, "llava", 10, 10);
  Session b = make_session(2, "llava", 10, 10);
  REQUIRE(server.enqueue(&a, 0));
  REQUIRE(server.enqueue(&b, 0));
  CHECK(server.active_count() == 2);
  CHECK(a.inference_start_us == 0);
  CHECK(b.inference_start_us == 0);
}
