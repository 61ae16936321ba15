#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicesim/domain.hpp"

namespace slicesim {

// ---- service tunnel envelope --------------------------------------------
//
// wire layout, 9-byte header followed by the payload:
//   0x57 0x4C | version 0x01 | llm_service_id | fruit_slice_id | payload_len (u32 BE)

inline constexpr uint8_t kEnvelopeMagic0 = 0x57;
inline constexpr uint8_t kEnvelopeMagic1 = 0x4C;
inline constexpr uint8_t kEnvelopeVersion = 0x01;
inline constexpr size_t kEnvelopeHeaderBytes = 9;

struct TunnelEnvelope {
  uint8_t llm_service_id = 0;
  uint8_t fruit_slice_id = 0;
  std::vector<uint8_t> payload;
};

enum class EnvelopeError { none, too_short, bad_magic, bad_version, length_mismatch };
const char* to_string(EnvelopeError e);

std::vector<uint8_t> encode_envelope(const TunnelEnvelope& env);

struct EnvelopeDecode {
  bool ok = false;
  EnvelopeError error = EnvelopeError::none;
  TunnelEnvelope envelope;
};

EnvelopeDecode decode_envelope(std::span<const uint8_t> bytes);

// Resolves the slice pair a UE's traffic lands in. Unknown fruit ids keep
// the UE on the branch default and set the warning flag.
struct SliceMapping {
  std::string branch_id;
  std::string fruit_id;  // empty = branch-direct
  bool unknown_fruit = false;
};

SliceMapping map_ue_to_slices(const TunnelEnvelope& env, const UeContext& ue,
                              const SliceTree& tree);

// ---- timed slice reconfiguration -----------------------------------------

struct SliceConfig {
  std::string label;
  std::map<std::string, std::pair<double, double>> fruit_ratios;  // fruit -> (min, max)
  std::map<int, std::string> ue_fruit;                            // ue_id -> fruit ("" clears)
};

struct SliceConfigSchedule {
  std::vector<SliceConfig> configs;
  int64_t dwell_us = 30'000'000;
  bool cyclic = true;
};

// -1 when the schedule is empty
int schedule_index_at(const SliceConfigSchedule& schedule, int64_t sim_time_us);

// mutates ratios and UE->fruit mappings; in-flight traffic is untouched
void apply_config(const SliceConfig& config, SliceTree& tree, std::vector<UeContext>& ues);

// ---- embedded occupancy policy -------------------------------------------

struct SliceWindowStats {
  std::string slice_id;
  double mean_occupancy_bytes = 0.0;
  double max_occupancy_bytes = 0.0;
  int64_t served_bytes = 0;
  double mean_latency_us = 0.0;  // over sessions completed in the window, 0 if none
  int quota_prbs = 0;
  int64_t buffer_bytes = 0;  // at window end
};

struct RatioChange {
  std::string slice_id;
  double new_max_ratio;
};

// Hysteresis ladder controller: mean occupancy above high_water * window max
// steps the fruit's max_ratio up one ladder rung, below low_water * window
// max (or an idle window) steps it down; at most one step per window.
std::vector<RatioChange> embedded_policy(const std::vector<SliceWindowStats>& stats,
                                         const SliceTree& tree,
                                         const std::vector<double>& ladder,
                                         double high_water = 0.75, double low_water = 0.25);

// ---- separated-mode optimizer protocol ------------------------------------

struct SnapshotSlice {
  int quota_prbs = 0;
  int64_t served_bytes = 0;
  double mean_latency_us = 0.0;
  int64_t buffer_bytes = 0;
};

struct UeSnapshot {
  int cqi = 0;
  int mcs = 0;
};

struct Snapshot {
  int64_t epoch = 0;
  std::map<std::string, SnapshotSlice> slices;
  std::map<int, UeSnapshot> ues;
};

struct RatioUpdate {
  int64_t epoch = 0;
  std::map<std::string, std::pair<double, double>> ratios;  // fruit -> (min, max)
};

std::string encode_snapshot(const Snapshot& snap);
std::optional<Snapshot> parse_snapshot(const std::string& line);
std::string encode_update(const RatioUpdate& update);
std::optional<RatioUpdate> parse_update(const std::string& line);

// line transport to the optimizer process (tests swap in an in-memory fake)
class OptimizerTransport {
 public:
  virtual ~OptimizerTransport() = default;
  virtual void send_line(const std::string& line) = 0;
  virtual std::optional<std::string> poll_line() = 0;  // non-blocking
  virtual bool alive() = 0;
};

struct ProtocolConfig {
  int timeout_epochs = 2;
};

// Epoch-aligned exchange: at every boundary the controller first drains the
// inbox (replies echo the previously sent epoch), then publishes the new
// snapshot. Malformed, mis-echoed, or invalid updates are rejected and the
// embedded policy covers that epoch; after timeout_epochs of silence the
// fallback becomes sticky until a valid echo re-engages separated mode.
class SeparatedProtocol {
 public:
  explicit SeparatedProtocol(ProtocolConfig cfg = {}) : cfg_(cfg) {}

  struct EpochResult {
    bool use_embedded = false;
    bool rejected = false;
    std::string reject_reason;
    std::optional<RatioUpdate> accepted;
  };

  EpochResult step_epoch(const Snapshot& snap, OptimizerTransport& transport,
                         const SliceTree& tree);

  bool in_fallback() const { return fallback_; }
  int fallback_events() const { return fallback_events_; }

 private:
  ProtocolConfig cfg_;
  bool sent_any_ = false;
  int64_t last_sent_epoch_ = -1;
  int silent_epochs_ = 0;
  bool fallback_ = false;
  int fallback_events_ = 0;
};

// checks an update against the tree: fruits must exist, ratios in [0,1],
// min <= max, and the patched tree must still validate
std::optional<std::string> ratio_update_problem(const RatioUpdate& update, const SliceTree& tree);

// ---- UCB slice-configuration bandit ---------------------------------------

double reward_from_latency(int64_t latency_us, int64_t target_us = 2'000'000);

class UcbSelector {
 public:
  explicit UcbSelector(size_t n_arms) : mean_(n_arms, 0.0), count_(n_arms, 0) {}

  // unplayed arms first in declaration order, then argmax of
  // mean + sqrt(2 ln t / count), ties to the lowest index
  size_t select() const;
  double score(size_t arm) const;  // infinity for unplayed arms
  void update(size_t arm, double reward);

  int64_t total_pulls() const { return total_; }
  const std::vector<int64_t>& counts() const { return count_; }
  const std::vector<double>& means() const { return mean_; }

 private:
  std::vector<double> mean_;
  std::vector<int64_t> count_;
  int64_t total_ = 0;
};

}  // namespace slicesim
