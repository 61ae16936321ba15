#pragma once

#include <vector>

#include "slicesim/domain.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

// one downlink injection: `bytes` become schedulable `offset_us` after
// inference completes
struct EmissionEvent {
  int64_t offset_us = 0;
  int64_t tokens = 0;
  int64_t bytes = 0;
};

struct ResponsePlan {
  int input_tokens = 0;
  int output_tokens = 0;
  int64_t response_bytes = 0;
  std::vector<EmissionEvent> emissions;
};

int64_t image_payload_bytes(int width, int height, double compression_ratio);
int64_t text_payload_bytes(int expected_words);

// Samples one request for the UE. Draw order is fixed (mode, base
// resolution, coefficient, word count) so streams replay identically.
Session next_request(const UeContext& ue, int64_t now_us, Rng& rng);

// Bursty token emission: burst sizes are geometric (mean 8, min 1), burst k
// lands at cumulative_tokens_through_k * beta. Byte counts telescope so they
// always sum to round(output_tokens * bytes_per_token).
std::vector<EmissionEvent> token_emission_schedule(int output_tokens, const ModelProfile& model,
                                                   Rng& rng);

ResponsePlan plan_response(const Session& request, const ModelProfile& model, Rng& rng);

}  // namespace slicesim
