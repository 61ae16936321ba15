#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "slicesim/domain.hpp"

namespace slicesim {

struct ServerConfig {
  int n_gpus = 1;
  int queue_depth = 64;  // max concurrent sessions (active + waiting)
  int64_t processing_overhead_us = 5'000;
};

int64_t inference_time_us(const ModelProfile& model, bool cold_start, int input_tokens,
                          int output_tokens);

// Single-server FIFO inference with cold/warm model loading. All event times
// are exact microsecond marks: a session queued behind a GPU that frees at
// time f starts at f, not at the next slot boundary.
class LlmServer {
 public:
  LlmServer(ServerConfig cfg, std::map<std::string, ModelProfile> models);

  // false = queue overflow, caller fails the session with reason "overload"
  bool enqueue(Session* session, int64_t now_us);

  // completes every inference finishing at or before now_us, chaining queued
  // sessions at exact completion instants; returns sessions completed this
  // call in completion order (inference_done_us stamped, status = downlink)
  std::vector<Session*> advance(int64_t now_us);

  double gpu_utilization(int64_t now_us, int64_t window_us) const;
  int64_t cumulative_busy_us(int64_t now_us) const;

  size_t active_count() const;
  size_t queued_count() const { return queue_.size(); }
  size_t concurrent_count() const { return active_count() + queue_.size(); }
  const ModelProfile& model(const std::string& name) const;
  const ServerConfig& config() const { return cfg_; }

 private:
  struct Gpu {
    Session* active = nullptr;
    int64_t finish_us = 0;
    std::string loaded_model;
  };

  void dispatch(int64_t time_us);

  ServerConfig cfg_;
  std::map<std::string, ModelProfile> models_;
  std::vector<Gpu> gpus_;
  std::deque<Session*> queue_;
  int rr_cursor_ = 0;
  std::vector<std::pair<int64_t, int64_t>> busy_;  // [start, finish) per dispatch
};

}  // namespace slicesim
