#include "slicesim/traffic.hpp"

#include <algorithm>
#include <cmath>

namespace slicesim {

namespace {

int round_even(double v) {
  return static_cast<int>(std::llround(v / 2.0)) * 2;
}

}  // namespace

int64_t image_payload_bytes(int width, int height, double compression_ratio) {
  return std::llround(static_cast<double>(width) * height * 3.0 / compression_ratio);
}

int64_t text_payload_bytes(int expected_words) {
  return static_cast<int64_t>(expected_words) * 6;
}

Session next_request(const UeContext& ue, int64_t now_us, Rng& rng) {
  const UeProfile& p = ue.profile;
  Session s;
  s.ue_id = ue.ue_id;
  s.request_created_us = now_us;
  s.status = SessionStatus::uplink;
  s.mode = rng.bernoulli(p.mode_mix) ? RequestMode::image_request : RequestMode::text_request;
  if (s.mode == RequestMode::image_request) {
    auto [bw, bh] = p.base_resolutions[rng.pick(p.base_resolutions.size())];
    double coeff = p.resolution_coeffs[rng.pick(p.resolution_coeffs.size())];
    s.tx_width = round_even(bw * coeff);
    s.tx_height = round_even(bh * coeff);
  }
  s.expected_words = p.word_counts[rng.pick(p.word_counts.size())];
  s.request_bytes = s.mode == RequestMode::image_request
                        ? image_payload_bytes(s.tx_width, s.tx_height, p.compression_ratio)
                        : text_payload_bytes(s.expected_words);
  return s;
}

std::vector<EmissionEvent> token_emission_schedule(int output_tokens, const ModelProfile& model,
                                                   Rng& rng) {
  std::vector<EmissionEvent> events;
  int64_t remaining = output_tokens;
  int64_t cum_tokens = 0;
  int64_t cum_bytes = 0;
  int64_t prev_offset = -1;
  while (remaining > 0) {
    int64_t burst = std::min<int64_t>(rng.geometric_burst(8.0), remaining);
    cum_tokens += burst;
    remaining -= burst;
    int64_t bytes_through = std::llround(cum_tokens * model.bytes_per_token);
    EmissionEvent ev;
    ev.tokens = burst;
    ev.bytes = bytes_through - cum_bytes;
    ev.offset_us =
        std::max<int64_t>(std::llround(cum_tokens * model.beta_us_per_output_token), prev_offset + 1);
    cum_bytes = bytes_through;
    prev_offset = ev.offset_us;
    events.push_back(ev);
  }
  return events;
}

ResponsePlan plan_response(const Session& request, const ModelProfile& model, Rng& rng) {
  ResponsePlan plan;
  if (request.mode == RequestMode::image_request) {
    plan.input_tokens = static_cast<int>(std::ceil(request.tx_width / 32.0) *
                                         std::ceil(request.tx_height / 32.0));
  } else {
    plan.input_tokens =
        static_cast<int>(std::ceil(request.request_bytes / model.bytes_per_token));
  }
  double nominal = request.expected_words * model.tokens_per_word;
  double v = rng.lognormal_clamped(0.0, 0.5, 0.25, 4.0);
  int64_t cap = std::max<int64_t>(1, std::llround(8.0 * nominal));
  plan.output_tokens =
      static_cast<int>(std::clamp<int64_t>(std::llround(nominal * v), 1, cap));
  plan.response_bytes = std::llround(plan.output_tokens * model.bytes_per_token);
  plan.emissions = token_emission_schedule(plan.output_tokens, model, rng);
  return plan;
}

}  // namespace slicesim
