#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slicesim {

enum class ServiceClass { eMBB, URLLC, mMTC };
enum class Direction { uplink, downlink };
enum class RequestMode { image_request, text_request };
enum class SessionStatus { pending, uplink, queued, inferring, downlink, complete, failed };
enum class Mobility { stationary, mobile };

const char* to_string(ServiceClass c);
const char* to_string(Direction d);
const char* to_string(RequestMode m);
const char* to_string(SessionStatus s);

struct Nssai {
  int sst = 1;       // 0..255
  int sd = 0;        // 0..16777215
  bool operator==(const Nssai&) const = default;
};

struct FruitSlice {
  std::string id;
  int numeric_id = 0;  // one-byte wire id used by tunnel envelopes
  std::string parent_branch;
  double min_ratio = 0.0;  // fraction of the parent branch quota
  double max_ratio = 1.0;
  std::string llm_model;
  int price_tier = 0;
};

struct BranchSlice {
  std::string id;
  ServiceClass service_class = ServiceClass::eMBB;
  Nssai nssai;
  double min_ratio = 0.0;  // fraction of the cell PRB pool
  double max_ratio = 1.0;
  int priority = 0;
  std::vector<FruitSlice> fruits;
};

struct SliceTree {
  int total_prbs = 0;  // per-direction pool size
  std::vector<BranchSlice> branches;

  BranchSlice* find_branch(const std::string& id);
  const BranchSlice* find_branch(const std::string& id) const;
  FruitSlice* find_fruit(const std::string& id);
  const FruitSlice* find_fruit(const std::string& id) const;
  const BranchSlice* default_branch() const;  // first eMBB branch, else first branch
};

struct Violation {
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_slice_tree(const SliceTree& tree);

struct SlotClock {
  int frame = 0;  // wraps at 1024
  int slot = 0;   // wraps at slots_per_frame
  int slots_per_frame = 20;
  int64_t slot_duration_us = 500;
  int64_t completed_slots = 0;
  int64_t sim_time_us = 0;

  double slot_duration_s() const { return static_cast<double>(slot_duration_us) * 1e-6; }
};

void advance_clock(SlotClock& clock);

struct ChannelModel {
  double snr_mean_db = 20.0;
  double snr_std_db = 2.0;
  double ar_coefficient = 0.9;  // only used when mobility == mobile
  Mobility mobility = Mobility::stationary;
};

struct ChannelState {
  double snr_db = 20.0;
  int cqi = 0;   // 0..15
  int ri = 1;
  double rsrp_dbm = -90.0;
  int ul_mcs = 0;  // 0..28
  int dl_mcs = 0;
  double ul_bler = 0.0;
  double dl_bler = 0.0;
  double ph_db = 59.4;
  double pcmax_dbm = 23.0;
};

struct UeProfile {
  int64_t request_period_us = 5'000'000;
  double mode_mix = 0.5;  // probability of image_request
  std::vector<std::pair<int, int>> base_resolutions = {
      {320, 240}, {480, 320}, {576, 432}, {640, 480}};
  std::vector<double> resolution_coeffs = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
  std::vector<int> word_counts = {50, 100, 150, 200};
  double compression_ratio = 20.0;
  Mobility mobility = Mobility::stationary;
};

struct UeContext {
  int ue_id = 0;
  std::string imsi;
  uint32_t rnti = 0;
  std::string branch_id;            // explicit binding; empty = resolve via NSSAI
  std::string fruit_id;             // empty = branch-direct
  std::optional<Nssai> nssai;
  ChannelModel channel_model;
  ChannelState channel;
  int64_t ul_buffer_bytes = 0;
  int64_t dl_buffer_bytes = 0;
  double pf_avg_ul_bps = 1.0;       // floored at 1 bit/s
  double pf_avg_dl_bps = 1.0;
  UeProfile profile;
  bool unknown_fruit_flag = false;  // set when an envelope referenced a fruit not in the tree
};

struct ModelProfile {
  std::string name;
  double param_count_b = 7.0;  // billions of parameters
  int64_t warm_base_us = 200'000;
  int64_t cold_extra_us = 5'000'000;
  double alpha_us_per_input_token = 200.0;
  double beta_us_per_output_token = 30'000.0;
  double tokens_per_word = 1.3;
  double bytes_per_token = 5.0;
};

struct Session {
  int64_t request_id = 0;
  int ue_id = 0;
  RequestMode mode = RequestMode::image_request;
  int tx_width = 0;   // 0 for text requests
  int tx_height = 0;
  int expected_words = 0;
  int64_t request_bytes = 0;
  int64_t response_bytes = 0;
  int input_tokens = 0;
  int output_tokens = 0;
  std::string model;

  // microsecond marks, -1 until the phase is reached; always monotone
  int64_t request_created_us = -1;
  int64_t uplink_done_us = -1;
  int64_t inference_start_us = -1;
  int64_t inference_done_us = -1;
  int64_t downlink_done_us = -1;

  SessionStatus status = SessionStatus::pending;
  std::string fail_reason;

  bool cold_start = false;
  int64_t scheduled_ul_bytes = 0;  // sum of granted uplink TBS while this session was draining
  int config_index = -1;           // control config active at request creation
  std::string slice_id;            // fruit (or branch) the UE sat in at creation
};

}  // namespace slicesim
