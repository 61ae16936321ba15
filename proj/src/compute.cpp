#include "slicesim/compute.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slicesim {

int64_t inference_time_us(const ModelProfile& model, bool cold_start, int input_tokens,
                          int output_tokens) {
  int64_t base = model.warm_base_us + (cold_start ? model.cold_extra_us : 0);
  return base + std::llround(model.alpha_us_per_input_token * input_tokens +
                             model.beta_us_per_output_token * output_tokens);
}

LlmServer::LlmServer(ServerConfig cfg, std::map<std::string, ModelProfile> models)
    : cfg_(cfg), models_(std::move(models)) {
  gpus_.resize(std::max(1, cfg_.n_gpus));
}

const ModelProfile& LlmServer::model(const std::string& name) const {
  auto it = models_.find(name);
  if (it == models_.end()) throw std::out_of_range("unknown model profile '" + name + "'");
  return it->second;
}

size_t LlmServer::active_count() const {
  size_t n = 0;
  for (const auto& g : gpus_)
    if (g.active) ++n;
  return n;
}

bool LlmServer::enqueue(Session* session, int64_t now_us) {
  if (concurrent_count() >= static_cast<size_t>(cfg_.queue_depth)) return false;
  session->status = SessionStatus::queued;
  queue_.push_back(session);
  dispatch(now_us);
  return true;
}

void LlmServer::dispatch(int64_t time_us) {
  while (!queue_.empty()) {
    int free_gpu = -1;
    for (size_t k = 0; k < gpus_.size(); ++k) {
      int idx = (rr_cursor_ + static_cast<int>(k)) % static_cast<int>(gpus_.size());
      if (!gpus_[static_cast<size_t>(idx)].active) {
        free_gpu = idx;
        break;
      }
    }
    if (free_gpu < 0) return;
    rr_cursor_ = (free_gpu + 1) % static_cast<int>(gpus_.size());

    Gpu& gpu = gpus_[static_cast<size_t>(free_gpu)];
    Session* s = queue_.front();
    queue_.pop_front();
    bool cold = gpu.loaded_model != s->model;
    int64_t duration = inference_time_us(model(s->model), cold, s->input_tokens, s->output_tokens);
    s->cold_start = cold;
    s->inference_start_us = time_us;
    s->status = SessionStatus::inferring;
    gpu.active = s;
    gpu.finish_us = time_us + duration;
    gpu.loaded_model = s->model;
    busy_.push_back({time_us, gpu.finish_us});
  }
}

std::vector<Session*> LlmServer::advance(int64_t now_us) {
  std::vector<Session*> completed;
  for (;;) {
    int next = -1;
    for (size_t i = 0; i < gpus_.size(); ++i) {
      if (!gpus_[i].active || gpus_[i].finish_us > now_us) continue;
      if (next < 0 || gpus_[i].finish_us < gpus_[static_cast<size_t>(next)].finish_us)
        next = static_cast<int>(i);
    }
    if (next < 0) break;
    Gpu& gpu = gpus_[static_cast<size_t>(next)];
    Session* s = gpu.active;
    s->inference_done_us = gpu.finish_us;
    s->status = SessionStatus::downlink;
    completed.push_back(s);
    gpu.active = nullptr;
    dispatch(s->inference_done_us);
  }
  return completed;
}

int64_t LlmServer::cumulative_busy_us(int64_t now_us) const {
  int64_t total = 0;
  for (const auto& [start, finish] : busy_)
    total += std::max<int64_t>(0, std::min(finish, now_us) - start);
  return total;
}

double LlmServer::gpu_utilization(int64_t now_us, int64_t window_us) const {
  if (window_us <= 0) return 0.0;
  int64_t lo = now_us - window_us;
  int64_t total = 0;
  for (const auto& [start, finish] : busy_) {
    int64_t overlap = std::min(finish, now_us) - std::max(start, lo);
    if (overlap > 0) total += overlap;
  }
  double u = static_cast<double>(total) /
             (static_cast<double>(window_us) * static_cast<double>(gpus_.size()));
  return std::clamp(u, 0.0, 1.0);
}

}  // namespace slicesim
