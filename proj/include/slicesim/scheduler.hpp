#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "slicesim/channel.hpp"
#include "slicesim/domain.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

// Two-level PRB allocation (branches over the cell pool, fruits over each
// branch quota) followed by proportional-fair intra-slice scheduling with
// per-grant HARQ. Uplink and downlink run against independent pools of
// tree.total_prbs each.

struct SliceDemand {
  std::string slice_id;  // fruit id, or branch id for branch-direct traffic
  std::string branch_id;
  int64_t ul_bytes = 0;
  int64_t dl_bytes = 0;
  int active_ues = 0;
  int ul_ref_mcs = 0;  // best member UE MCS, per direction
  int dl_ref_mcs = 0;
  int ul_retx_prbs = 0;  // pending retransmission PRBs also competing for quota
  int dl_retx_prbs = 0;
};

struct SlotGrant {
  int ue_id = 0;
  Direction direction = Direction::uplink;
  int n_prbs = 0;  // >= 1
  int mcs = 0;
  int64_t tbs_bytes = 0;
  int64_t payload_bytes = 0;  // buffered bytes the grant actually carries (<= tbs_bytes)
  bool retransmission = false;
  int attempt = 1;  // 1..max_attempts
  bool delivered = false;
  std::string slice_id;
};

struct SliceAllocation {
  std::map<std::string, int> quota;        // branch ids and fruit ids
  std::map<std::string, int> group_quota;  // scheduling groups (fruit ids + branch-direct)
  int unused_prbs = 0;
};

struct SlotOutcome {
  std::vector<SlotGrant> grants;
  SliceAllocation ul_alloc;
  SliceAllocation dl_alloc;
  int ul_granted_prbs = 0;
  int dl_granted_prbs = 0;
  int ul_unused_prbs = 0;
  int dl_unused_prbs = 0;
  int64_t delivered_bytes(int ue_id, Direction dir) const;
};

// One water-filling level: guarantees first (min(demand, floor(min_ratio *
// pool))), then the residual pool proportionally to residual demand with
// largest-remainder rounding, each slice capped at min(demand,
// floor(max_ratio * pool)). Ties break by declaration order. All arithmetic
// on the proportional shares is exact (integer cross-multiplication).
struct SliceSpec {
  double min_ratio = 0.0;
  double max_ratio = 1.0;
  int64_t demand_prbs = 0;
};

std::vector<int> fill_quotas(int pool_prbs, const std::vector<SliceSpec>& specs);

int64_t demand_prbs_for(int64_t bytes, int ref_mcs, int retx_prbs);

SliceAllocation allocate_slices(const SliceTree& tree, const std::vector<SliceDemand>& demands,
                                int total_prbs, Direction dir);

// nullptr when the tree has no branches
const BranchSlice* determine_branch(const UeContext& ue, const SliceTree& tree);

double pf_metric(const UeContext& ue, Direction dir, const SlotClock& clock);

void update_pf_average(UeContext& ue, Direction dir, int64_t served_bits, const SlotClock& clock,
                       int window_slots, double floor_bps = 1.0);

struct MacConfig {
  int pf_window_slots = 100;
  double pf_floor_bps = 1.0;
  int max_attempts = 4;
  enum class BlerMode { model, never_error, always_error };
  BlerMode bler_mode = BlerMode::model;
  bool step_channels = true;
};

class MacScheduler {
 public:
  explicit MacScheduler(MacConfig cfg = {}) : cfg_(cfg) {}

  // Steps channels, derives demands, allocates both pools, schedules each
  // group by PF metric (retransmissions first), applies per-grant error
  // outcomes, drains/requeues buffers and updates PF averages.
  SlotOutcome run_slot(const SliceTree& tree, std::vector<UeContext>& ues,
                       const SlotClock& clock, std::vector<Rng>& ue_rngs);

  int64_t pending_harq_bytes(int ue_id, Direction dir) const;
  int64_t pending_harq_bytes() const;
  const MacConfig& config() const { return cfg_; }

 private:
  struct HarqEntry {
    int ue_id;
    int n_prbs;
    int mcs;
    int64_t tbs;
    int64_t payload;
    int attempt;  // attempt number the retransmission will carry
    std::string slice_id;
  };

  std::deque<HarqEntry>& harq(Direction dir) {
    return dir == Direction::uplink ? ul_harq_ : dl_harq_;
  }

  MacConfig cfg_;
  std::deque<HarqEntry> ul_harq_;
  std::deque<HarqEntry> dl_harq_;
};

}  // namespace slicesim
