#include "slicesim/scheduler.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace slicesim {

int64_t SlotOutcome::delivered_bytes(int ue_id, Direction dir) const {
  int64_t total = 0;
  for (const auto& g : grants)
    if (g.delivered && g.ue_id == ue_id && g.direction == dir) total += g.payload_bytes;
  return total;
}

namespace {

int64_t floor_ratio(double ratio, int64_t pool) {
  return static_cast<int64_t>(std::floor(ratio * pool + 1e-9));
}

}  // namespace

std::vector<int> fill_quotas(int pool_prbs, const std::vector<SliceSpec>& specs) {
  const size_t n = specs.size();
  std::vector<int64_t> target(n), alloc(n), weight(n);
  int64_t residual = pool_prbs;

  for (size_t i = 0; i < n; ++i) {
    int64_t cap = floor_ratio(specs[i].max_ratio, pool_prbs);
    int64_t guarantee = floor_ratio(specs[i].min_ratio, pool_prbs);
    target[i] = std::min(specs[i].demand_prbs, cap);
    alloc[i] = std::min({specs[i].demand_prbs, guarantee, target[i]});
    weight[i] = specs[i].demand_prbs - alloc[i];
    residual -= alloc[i];
  }
  // guarantees of a validated tree always fit; shed deterministically if not
  while (residual < 0) {
    size_t worst = 0;
    for (size_t i = 1; i < n; ++i)
      if (alloc[i] >= alloc[worst]) worst = i;
    if (alloc[worst] == 0) break;
    --alloc[worst];
    ++weight[worst];
    ++residual;
  }

  std::vector<size_t> active;
  for (size_t i = 0; i < n; ++i)
    if (weight[i] > 0 && alloc[i] < target[i]) active.push_back(i);

  while (residual > 0 && !active.empty()) {
    __int128 weight_sum = 0;
    for (size_t i : active) weight_sum += weight[i];

    // freeze every slice whose proportional share meets its headroom
    bool froze = false;
    for (auto it = active.begin(); it != active.end();) {
      size_t i = *it;
      int64_t headroom = target[i] - alloc[i];
      if (static_cast<__int128>(residual) * weight[i] >= headroom * weight_sum) {
        alloc[i] = target[i];
        residual -= headroom;
        it = active.erase(it);
        froze = true;
      } else {
        ++it;
      }
    }
    if (froze) continue;

    // nobody saturates: largest-remainder apportionment of the residual
    int64_t leftover = residual;
    std::vector<std::pair<int64_t, size_t>> remainders;  // (-remainder, index) for stable order
    for (size_t i : active) {
      __int128 share = static_cast<__int128>(residual) * weight[i];
      int64_t base = static_cast<int64_t>(share / weight_sum);
      int64_t rem = static_cast<int64_t>(share % weight_sum);
      alloc[i] += base;
      leftover -= base;
      remainders.push_back({-rem, i});
    }
    std::sort(remainders.begin(), remainders.end());
    for (int64_t k = 0; k < leftover; ++k) {
      size_t i = remainders[static_cast<size_t>(k)].second;
      assert(alloc[i] < target[i]);
      ++alloc[i];
    }
    residual = 0;
  }

  std::vector<int> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = static_cast<int>(alloc[i]);
  return out;
}

int64_t demand_prbs_for(int64_t bytes, int ref_mcs, int retx_prbs) {
  int64_t per_prb = tbs_bytes(ref_mcs, 1);
  int64_t prbs = bytes > 0 ? (bytes + per_prb - 1) / per_prb : 0;
  return prbs + retx_prbs;
}

SliceAllocation allocate_slices(const SliceTree& tree, const std::vector<SliceDemand>& demands,
                                int total_prbs, Direction dir) {
  const bool ul = dir == Direction::uplink;
  auto bytes_of = [&](const SliceDemand& d) { return ul ? d.ul_bytes : d.dl_bytes; };
  auto ref_of = [&](const SliceDemand& d) { return ul ? d.ul_ref_mcs : d.dl_ref_mcs; };
  auto retx_of = [&](const SliceDemand& d) { return ul ? d.ul_retx_prbs : d.dl_retx_prbs; };

  auto find_demand = [&](const std::string& id) -> const SliceDemand* {
    for (const auto& d : demands)
      if (d.slice_id == id) return &d;
    return nullptr;
  };

  SliceAllocation result;

  // level 1: branch quotas over the cell pool
  std::vector<SliceSpec> branch_specs;
  for (const auto& b : tree.branches) {
    int64_t bytes = 0;
    int ref = 0;
    int retx = 0;
    auto fold = [&](const SliceDemand* d) {
      if (!d) return;
      bytes += bytes_of(*d);
      ref = std::max(ref, ref_of(*d));
      retx += retx_of(*d);
    };
    fold(find_demand(b.id));
    for (const auto& f : b.fruits) fold(find_demand(f.id));
    branch_specs.push_back({b.min_ratio, b.max_ratio, demand_prbs_for(bytes, ref, retx)});
  }
  std::vector<int> branch_quota = fill_quotas(total_prbs, branch_specs);

  // level 2: fruit quotas (plus a branch-direct share) over each branch quota
  int used = 0;
  for (size_t bi = 0; bi < tree.branches.size(); ++bi) {
    const auto& b = tree.branches[bi];
    result.quota[b.id] = branch_quota[bi];

    std::vector<SliceSpec> specs;
    for (const auto& f : b.fruits) {
      const SliceDemand* d = find_demand(f.id);
      specs.push_back({f.min_ratio, f.max_ratio,
                       d ? demand_prbs_for(bytes_of(*d), ref_of(*d), retx_of(*d)) : 0});
    }
    const SliceDemand* direct = find_demand(b.id);
    specs.push_back({0.0, 1.0,
                     direct ? demand_prbs_for(bytes_of(*direct), ref_of(*direct), retx_of(*direct))
                            : 0});

    std::vector<int> q = fill_quotas(branch_quota[bi], specs);
    for (size_t fi = 0; fi < b.fruits.size(); ++fi) {
      result.quota[b.fruits[fi].id] = q[fi];
      result.group_quota[b.fruits[fi].id] = q[fi];
      used += q[fi];
    }
    result.group_quota[b.id] = q.back();
    used += q.back();
  }
  result.unused_prbs = total_prbs - used;
  return result;
}

const BranchSlice* determine_branch(const UeContext& ue, const SliceTree& tree) {
  if (tree.branches.empty()) return nullptr;
  if (!ue.branch_id.empty()) {
    if (const BranchSlice* b = tree.find_branch(ue.branch_id)) return b;
  }
  if (ue.nssai) {
    for (const auto& b : tree.branches)
      if (b.nssai == *ue.nssai) return &b;
  }
  return tree.default_branch();
}

double pf_metric(const UeContext& ue, Direction dir, const SlotClock& clock) {
  int mcs = dir == Direction::uplink ? ue.channel.ul_mcs : ue.channel.dl_mcs;
  double inst_bps = static_cast<double>(tbs_bytes(mcs, 1)) * 8.0 / clock.slot_duration_s();
  double avg = dir == Direction::uplink ? ue.pf_avg_ul_bps : ue.pf_avg_dl_bps;
  return inst_bps / std::max(avg, 1.0);
}

void update_pf_average(UeContext& ue, Direction dir, int64_t served_bits, const SlotClock& clock,
                       int window_slots, double floor_bps) {
  double& avg = dir == Direction::uplink ? ue.pf_avg_ul_bps : ue.pf_avg_dl_bps;
  double rate = static_cast<double>(served_bits) / clock.slot_duration_s();
  double t = static_cast<double>(window_slots);
  avg = (1.0 - 1.0 / t) * avg + rate / t;
  if (avg < floor_bps) avg = floor_bps;
}

SlotOutcome MacScheduler::run_slot(const SliceTree& tree, std::vector<UeContext>& ues,
                                   const SlotClock& clock, std::vector<Rng>& ue_rngs) {
  SlotOutcome out;
  if (cfg_.step_channels)
    for (size_t i = 0; i < ues.size(); ++i)
      step_channel(ues[i].channel, ues[i].channel_model, ue_rngs[i]);

  std::map<int, size_t> ue_index;
  for (size_t i = 0; i < ues.size(); ++i) ue_index[ues[i].ue_id] = i;

  // scheduling groups in declaration order: per branch its fruits, then direct
  struct Group {
    std::string id;
    std::vector<UeContext*> members;
  };
  std::vector<Group> groups;
  std::map<int, std::string> ue_group;
  {
    std::map<std::string, std::vector<UeContext*>> membership;
    for (auto& ue : ues) {
      const BranchSlice* b = determine_branch(ue, tree);
      if (!b) continue;
      std::string gid = b->id;
      if (!ue.fruit_id.empty()) {
        const FruitSlice* f = tree.find_fruit(ue.fruit_id);
        if (f && f->parent_branch == b->id) gid = f->id;
      }
      membership[gid].push_back(&ue);
      ue_group[ue.ue_id] = gid;
    }
    for (const auto& b : tree.branches) {
      for (const auto& f : b.fruits) groups.push_back({f.id, membership[f.id]});
      groups.push_back({b.id, membership[b.id]});
    }
  }

  auto group_of_entry = [&](const HarqEntry& e) -> std::string {
    auto it = ue_group.find(e.ue_id);
    return it == ue_group.end() ? std::string() : it->second;
  };

  // demands
  std::vector<SliceDemand> demands;
  for (const auto& g : groups) {
    SliceDemand d;
    d.slice_id = g.id;
    d.active_ues = 0;
    for (const UeContext* ue : g.members) {
      d.ul_bytes += ue->ul_buffer_bytes;
      d.dl_bytes += ue->dl_buffer_bytes;
      if (ue->ul_buffer_bytes > 0 || ue->dl_buffer_bytes > 0) ++d.active_ues;
      d.ul_ref_mcs = std::max(d.ul_ref_mcs, ue->channel.ul_mcs);
      d.dl_ref_mcs = std::max(d.dl_ref_mcs, ue->channel.dl_mcs);
    }
    demands.push_back(d);
  }
  for (const auto& e : ul_harq_) {
    std::string gid = group_of_entry(e);
    for (auto& d : demands)
      if (d.slice_id == gid) d.ul_retx_prbs += e.n_prbs;
  }
  for (const auto& e : dl_harq_) {
    std::string gid = group_of_entry(e);
    for (auto& d : demands)
      if (d.slice_id == gid) d.dl_retx_prbs += e.n_prbs;
  }

  for (Direction dir : {Direction::uplink, Direction::downlink}) {
    SliceAllocation& alloc = dir == Direction::uplink ? out.ul_alloc : out.dl_alloc;
    alloc = allocate_slices(tree, demands, tree.total_prbs, dir);
    auto& harq_q = harq(dir);
    int granted = 0;

    for (const auto& g : groups) {
      int quota = alloc.group_quota.count(g.id) ? alloc.group_quota[g.id] : 0;
      if (quota <= 0) continue;

      // retransmissions first, oldest first, whole grants only
      for (auto it = harq_q.begin(); it != harq_q.end();) {
        if (group_of_entry(*it) == g.id && it->n_prbs <= quota) {
          SlotGrant grant;
          grant.ue_id = it->ue_id;
          grant.direction = dir;
          grant.n_prbs = it->n_prbs;
          grant.mcs = it->mcs;
          grant.tbs_bytes = it->tbs;
          grant.payload_bytes = it->payload;
          grant.retransmission = true;
          grant.attempt = it->attempt;
          grant.slice_id = g.id;
          out.grants.push_back(grant);
          quota -= it->n_prbs;
          granted += it->n_prbs;
          it = harq_q.erase(it);
        } else {
          ++it;
        }
      }

      // new data by PF metric; one grant drains the UE or the quota
      while (quota > 0) {
        UeContext* best = nullptr;
        double best_metric = -1.0;
        for (UeContext* ue : g.members) {
          int64_t buf =
              dir == Direction::uplink ? ue->ul_buffer_bytes : ue->dl_buffer_bytes;
          if (buf <= 0) continue;
          double m = pf_metric(*ue, dir, clock);
          if (m > best_metric || (m == best_metric && best && ue->ue_id < best->ue_id)) {
            best = ue;
            best_metric = m;
          }
        }
        if (!best) break;
        int64_t& buf =
            dir == Direction::uplink ? best->ul_buffer_bytes : best->dl_buffer_bytes;
        int mcs = dir == Direction::uplink ? best->channel.ul_mcs : best->channel.dl_mcs;
        int64_t per_prb = tbs_bytes(mcs, 1);
        int64_t need = (buf + per_prb - 1) / per_prb;
        int n = static_cast<int>(std::min<int64_t>(need, quota));
        SlotGrant grant;
        grant.ue_id = best->ue_id;
        grant.direction = dir;
        grant.n_prbs = n;
        grant.mcs = mcs;
        grant.tbs_bytes = tbs_bytes(mcs, n);
        grant.payload_bytes = std::min(grant.tbs_bytes, buf);
        grant.attempt = 1;
        grant.slice_id = g.id;
        buf -= grant.payload_bytes;
        quota -= n;
        granted += n;
        out.grants.push_back(grant);
      }
    }

    (dir == Direction::uplink ? out.ul_granted_prbs : out.dl_granted_prbs) = granted;
    (dir == Direction::uplink ? out.ul_unused_prbs : out.dl_unused_prbs) =
        tree.total_prbs - granted;
  }

  // per-grant error outcomes and HARQ bookkeeping
  for (auto& grant : out.grants) {
    UeContext& ue = ues[ue_index[grant.ue_id]];
    bool errored;
    switch (cfg_.bler_mode) {
      case MacConfig::BlerMode::never_error: errored = false; break;
      case MacConfig::BlerMode::always_error: errored = true; break;
      default:
        errored = bler_outcome(grant.mcs, ue.channel.snr_db, ue_rngs[ue_index[grant.ue_id]]);
    }
    if (!errored) {
      grant.delivered = true;
      continue;
    }
    if (grant.attempt < cfg_.max_attempts) {
      harq(grant.direction)
          .push_back({grant.ue_id, grant.n_prbs, grant.mcs, grant.tbs_bytes,
                      grant.payload_bytes, grant.attempt + 1, grant.slice_id});
    } else {
      int64_t& buf = grant.direction == Direction::uplink ? ue.ul_buffer_bytes
                                                          : ue.dl_buffer_bytes;
      buf += grant.payload_bytes;  // back to new data after the last attempt
    }
  }

  // PF averages move every slot for every UE, served or not
  for (auto& ue : ues) {
    for (Direction dir : {Direction::uplink, Direction::downlink}) {
      int64_t bits = out.delivered_bytes(ue.ue_id, dir) * 8;
      update_pf_average(ue, dir, bits, clock, cfg_.pf_window_slots, cfg_.pf_floor_bps);
    }
  }
  return out;
}

int64_t MacScheduler::pending_harq_bytes(int ue_id, Direction dir) const {
  const auto& q = dir == Direction::uplink ? ul_harq_ : dl_harq_;
  int64_t total = 0;
  for (const auto& e : q)
    if (e.ue_id == ue_id) total += e.payload;
  return total;
}

int64_t MacScheduler::pending_harq_bytes() const {
  int64_t total = 0;
  for (const auto& e : ul_harq_) total += e.payload;
  for (const auto& e : dl_harq_) total += e.payload;
  return total;
}

}  // namespace slicesim
