#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "slicesim/domain.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

// A cell is int, real, text, or null; null exports as an empty CSV field /
// JSON null. Column orders are frozen — the acceptance suite checks them
// against the committed manifest in docs/schema_manifest.json.
using Cell = std::variant<std::monostate, int64_t, double, std::string>;

std::string format_double(double v);       // deterministic "%.10g"
std::string cell_to_string(const Cell& c);

// request-level application record (one per completed session)
struct UeRecord {
  double timestamp_ms = 0;  // observed request creation
  double wireless_comm_time_ms = 0;
  double total_comm_time_ms = 0;
  std::string tx_image_resolution;  // "640x480", empty for text requests
  std::string rx_image_resolution;  // no image responses modeled: always null
  int expected_word_count = 0;
  int actual_word_count = 0;
  std::string llm_model;
  std::string request_mode;
  double upload_periodicity_ms = 0;
  double uplink_time_ms = 0;
  double downlink_time_ms = 0;
  int64_t downlink_text_size = 0;
  int64_t uplink_bytes = 0;
  int64_t downlink_bytes = 0;
  double queue_time_ms = 0;  // server admission wait, not folded into any share

  static const std::vector<std::string>& columns();
  std::vector<Cell> cells() const;
};

// slot-level scheduling record (grant slots plus periodic heartbeats)
struct RanRecord {
  double gnb_timestamp_ms = 0;  // observed slot time
  int frame_number = 0;
  int slot_number = 0;
  std::string imsi;
  uint32_t rnti = 0;
  int ue_id = 0;
  int ue_number = 0;
  double dl_throughput_mbps = 0;
  double ul_throughput_mbps = 0;
  double ph_db = 0;
  double pcmax_dbm = 0;
  double avg_rsrp_dbm = 0;
  int cqi = 0;
  int ri = 1;
  int dl_mcs = 0;
  int ul_mcs = 0;
  int64_t scheduled_ul_bytes = 0;   // granted uplink TBS in this slot
  int64_t estimated_ul_buffer = 0;  // uplink bytes still buffered
  int64_t dl_pdus_total = 0;        // cumulative delivered downlink grants
  double dl_bler_pct = 0;
  double ul_bler_pct = 0;
  int64_t dl_sch_bytes = 0;
  int dl_sch_rbs = 0;
  int64_t ul_sch_bytes = 0;
  int ul_sch_rbs = 0;
  int ul_mac_sdus = 0;
  double primary_slice_max_pct = 0;
  double primary_slice_min_pct = 0;
  bool has_secondary = false;  // false -> secondary columns export as null
  double secondary_slice_max_pct = 0;
  double secondary_slice_min_pct = 0;

  static const std::vector<std::string>& columns();
  std::vector<Cell> cells() const;
};

// inference-level record (one per completed inference)
struct ServerRecord {
  double timestamp_ms = 0;  // observed inference completion
  double llm_inference_time_ms = 0;
  double server_processing_time_ms = 0;
  int input_tokens = 0;
  int output_tokens = 0;
  double cold_start_time_ms = 0;
  double warm_start_time_ms = 0;
  // quality scoring needs reference outputs the simulator does not produce
  // (bleu/rouge/semantic export as null)
  double gpu_utilization_pct = 0;
  int64_t vram_usage_mb = 0;
  // downlink_image / response_text: payload contents are not materialized

  static const std::vector<std::string>& columns();
  std::vector<Cell> cells() const;
};

struct Records {
  std::vector<UeRecord> ue;
  std::vector<RanRecord> ran;
  std::vector<ServerRecord> server;
};

// per-layer observation jitter (clock sync error): true time + U[-1000, 1000] us
int64_t observed_timestamp_us(int64_t true_us, Rng& jitter_rng, bool enabled = true);

struct LatencyBreakdown {
  int64_t uplink_us = 0;
  int64_t queue_us = 0;
  int64_t inference_us = 0;
  int64_t downlink_us = 0;
  int64_t total_us = 0;
  // three shares summing to 1; queue time is folded into the inference share
  double uplink_share = 0;
  double inference_share = 0;
  double downlink_share = 0;
};

// requires a completed session (all five timestamps monotone)
LatencyBreakdown latency_breakdown(const Session& s);

// throws std::domain_error on nonpositive resources or latency
double larei(double rdv_bytes, double para_b, double resources_bytes, double latency_s,
             double omega = 1.0);
double lseq(double rdv_bytes, double error_rate, double para_b, double resources_bytes,
            double delta = 1.0);

enum class GroupBy { resolution, slice_config, direction };

struct GroupStats {
  std::string label;
  size_t count = 0;
  double mean_uplink_share = 0, mean_inference_share = 0, mean_downlink_share = 0;
  double se_uplink_share = 0, se_inference_share = 0, se_downlink_share = 0;
  double mean_total_us = 0;
};

struct BottleneckReport {
  std::vector<GroupStats> groups;
  std::vector<std::string> warnings;  // omitted empty buckets etc.
  std::string to_string() const;
};

// resolution grouping buckets image sessions into pixel-count sextiles R1..R6
BottleneckReport bottleneck_report(const std::vector<const Session*>& sessions, GroupBy by);

struct ExportCounts {
  size_t ue = 0, ran = 0, server = 0;
};

// writes {ue,ran,server}_metrics.{csv|jsonl} into dir; throws
// std::runtime_error when the sink is unwritable
ExportCounts export_records(const Records& records, const std::string& dir,
                            const std::string& format);

// generic read-back: rows of column -> textual cell (null -> empty string)
std::vector<std::map<std::string, std::string>> read_table(const std::string& path);

}  // namespace slicesim
