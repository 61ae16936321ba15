#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "slicesim/compute.hpp"
#include "slicesim/control.hpp"
#include "slicesim/metrics.hpp"
#include "slicesim/scenario.hpp"
#include "slicesim/scheduler.hpp"
#include "slicesim/traffic.hpp"

namespace slicesim {

struct UcbEpisode {
  size_t arm = 0;
  double reward = 0;
  int64_t completions = 0;
};

struct RunSummary {
  std::string scenario_name;
  std::string control_mode;
  uint64_t seed = 0;
  int64_t duration_slots = 0;
  int64_t sim_time_us = 0;
  int total_ues = 0;

  int64_t requests_created = 0;
  int64_t sessions_completed = 0;
  int64_t sessions_failed = 0;
  int64_t overload_failures = 0;
  double completion_rate = 0;

  double mean_latency_us = 0;
  double p95_latency_us = 0;
  double mean_uplink_share = 0;
  double mean_inference_share = 0;
  double mean_downlink_share = 0;
  double larei_mean = 0;
  double lseq_mean = 0;
  std::map<std::string, double> larei_by_slice;
  std::map<std::string, double> lseq_by_slice;
  std::map<std::string, int64_t> completed_by_slice;
  std::map<std::string, double> mean_latency_us_by_slice;

  int64_t ul_granted_prbs = 0, dl_granted_prbs = 0;
  int64_t ul_unused_prbs = 0, dl_unused_prbs = 0;
  int64_t harq_retransmissions = 0;
  double gpu_utilization = 0;  // busy fraction over the whole run

  int fallback_events = 0;   // separated mode
  int rejected_updates = 0;  // separated mode
  int accepted_updates = 0;  // separated mode
  int config_switches = 0;   // timed mode
  std::vector<int64_t> ucb_pulls;
  std::vector<double> ucb_means;
  std::vector<UcbEpisode> ucb_episodes;

  std::map<int, std::string> ue_slice;  // final UE -> slice mapping
};

struct RunResult {
  Records records;
  RunSummary summary;
  std::vector<std::unique_ptr<Session>> sessions;  // every session ever created
};

// Deterministic slot-stepped engine tying the pieces together. Event order
// inside one slot: inference completions, due response injections, control
// actions, request arrivals, MAC scheduling, delivery crediting, records.
class Simulation {
 public:
  // a transport is required for separated control mode only
  explicit Simulation(Scenario scenario, OptimizerTransport* optimizer = nullptr);

  RunResult run();

 private:
  struct Injection {
    int64_t at_us;
    int64_t seq;
    int ue_index;
    Session* session;
    int64_t bytes;
    bool operator>(const Injection& o) const {
      return std::tie(at_us, seq) > std::tie(o.at_us, o.seq);
    }
  };

  struct UeRuntime {
    int64_t next_request_us = 0;
    std::deque<std::pair<Session*, int64_t>> ul_fifo;  // session, undelivered bytes
    std::deque<std::pair<Session*, int64_t>> dl_fifo;
    Rng traffic_rng;
    int64_t dl_pdus_total = 0;
    // per-slot aggregates, reset every slot
    int64_t slot_ul_tbs = 0, slot_dl_tbs = 0;
    int64_t slot_ul_bytes = 0, slot_dl_bytes = 0;
    int slot_ul_rbs = 0, slot_dl_rbs = 0;
    int slot_ul_sdus = 0;
    bool slot_granted = false;
  };

  struct SliceWindow {
    double occupancy_sum = 0;
    double occupancy_max = 0;
    int64_t served_bytes = 0;
    double latency_sum_us = 0;
    int64_t latency_count = 0;
    int quota_prbs = 0;
    int64_t buffer_bytes = 0;
  };

  void create_ues();
  void spawn_requests(int64_t now_us);
  void handle_completion(Session* s, int64_t now_us);
  void handle_inference_done(Session* s, int64_t now_us);
  void run_control(int64_t now_us);
  void run_ucb_boundary();
  std::vector<SliceWindowStats> window_stats() const;
  void reset_window();
  void accumulate_window(const SlotOutcome& outcome);
  void credit_grants(const SlotOutcome& outcome, int64_t slot_end_us);
  void emit_ran_records(const SlotOutcome& outcome, int64_t slot_start_us);
  void fail_session(Session* s, const std::string& reason);
  const ModelProfile& model_for(const Session& s) const;

  Scenario sc_;
  OptimizerTransport* opt_ = nullptr;
  SliceTree tree_;
  SlotClock clock_;
  MacScheduler mac_;
  std::unique_ptr<LlmServer> server_;
  std::map<std::string, ModelProfile> models_;
  std::map<std::string, uint8_t> model_wire_id_;

  std::vector<UeContext> ues_;
  std::vector<Rng> mac_rngs_;
  std::vector<UeRuntime> rt_;

  std::vector<std::unique_ptr<Session>> sessions_;
  std::unordered_map<Session*, ResponsePlan> plans_;
  std::unordered_map<Session*, int64_t> dl_remaining_;
  std::priority_queue<Injection, std::vector<Injection>, std::greater<Injection>> injections_;
  int64_t injection_seq_ = 0;
  int64_t next_request_id_ = 0;

  // control state
  SeparatedProtocol proto_;
  Rng jit_ue_, jit_ran_, jit_server_;

  std::optional<UcbSelector> ucb_;
  size_t current_arm_ = 0;
  bool arm_active_ = false;
  int64_t episode_completions_ = 0;
  double episode_latency_sum_us_ = 0;
  int current_config_ = -1;
  int64_t epoch_counter_ = 0;

  std::map<std::string, SliceWindow> window_;
  int64_t window_slots_ = 0;

  // run accumulators
  Records records_;
  RunSummary summary_;
  std::vector<int64_t> latencies_us_;
  double share_ul_sum_ = 0, share_inf_sum_ = 0, share_dl_sum_ = 0;
  double larei_sum_ = 0, lseq_sum_ = 0;
  std::map<std::string, double> larei_slice_sum_, lseq_slice_sum_, latency_slice_sum_;
  std::map<std::string, int64_t> completed_slice_;
};

}  // namespace slicesim
