#include "slicesim/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace slicesim {

const char* to_string(EnvelopeError e) {
  switch (e) {
    case EnvelopeError::none: return "none";
    case EnvelopeError::too_short: return "too_short";
    case EnvelopeError::bad_magic: return "bad_magic";
    case EnvelopeError::bad_version: return "bad_version";
    case EnvelopeError::length_mismatch: return "length_mismatch";
  }
  return "?";
}

std::vector<uint8_t> encode_envelope(const TunnelEnvelope& env) {
  std::vector<uint8_t> out;
  out.reserve(kEnvelopeHeaderBytes + env.payload.size());
  out.push_back(kEnvelopeMagic0);
  out.push_back(kEnvelopeMagic1);
  out.push_back(kEnvelopeVersion);
  out.push_back(env.llm_service_id);
  out.push_back(env.fruit_slice_id);
  uint32_t len = static_cast<uint32_t>(env.payload.size());
  out.push_back(static_cast<uint8_t>(len >> 24));
  out.push_back(static_cast<uint8_t>(len >> 16));
  out.push_back(static_cast<uint8_t>(len >> 8));
  out.push_back(static_cast<uint8_t>(len));
  out.insert(out.end(), env.payload.begin(), env.payload.end());
  return out;
}

EnvelopeDecode decode_envelope(std::span<const uint8_t> bytes) {
  EnvelopeDecode result;
  if (bytes.size() < kEnvelopeHeaderBytes) {
    result.error = EnvelopeError::too_short;
    return result;
  }
  if (bytes[0] != kEnvelopeMagic0 || bytes[1] != kEnvelopeMagic1) {
    result.error = EnvelopeError::bad_magic;
    return result;
  }
  if (bytes[2] != kEnvelopeVersion) {
    result.error = EnvelopeError::bad_version;
    return result;
  }
  uint32_t len = (static_cast<uint32_t>(bytes[5]) << 24) | (static_cast<uint32_t>(bytes[6]) << 16) |
                 (static_cast<uint32_t>(bytes[7]) << 8) | static_cast<uint32_t>(bytes[8]);
  if (bytes.size() != kEnvelopeHeaderBytes + len) {
    result.error = EnvelopeError::length_mismatch;
    return result;
  }
  result.ok = true;
  result.envelope.llm_service_id = bytes[3];
  result.envelope.fruit_slice_id = bytes[4];
  result.envelope.payload.assign(bytes.begin() + kEnvelopeHeaderBytes, bytes.end());
  return result;
}

SliceMapping map_ue_to_slices(const TunnelEnvelope& env, const UeContext& ue,
                              const SliceTree& tree) {
  SliceMapping mapping;
  const BranchSlice* branch = nullptr;
  for (const auto& b : tree.branches) {
    for (const auto& f : b.fruits) {
      if (f.numeric_id == env.fruit_slice_id) {
        mapping.fruit_id = f.id;
        branch = &b;
        break;
      }
    }
    if (branch) break;
  }
  if (!branch) {
    // unknown fruit: stay on the UE's branch default
    mapping.unknown_fruit = true;
    const BranchSlice* b = nullptr;
    if (!ue.branch_id.empty()) b = tree.find_branch(ue.branch_id);
    if (!b && ue.nssai) {
      for (const auto& cand : tree.branches)
        if (cand.nssai == *ue.nssai) {
          b = &cand;
          break;
        }
    }
    if (!b) b = tree.default_branch();
    if (b) mapping.branch_id = b->id;
    return mapping;
  }
  mapping.branch_id = branch->id;
  return mapping;
}

int schedule_index_at(const SliceConfigSchedule& schedule, int64_t sim_time_us) {
  if (schedule.configs.empty()) return -1;
  int64_t n = static_cast<int64_t>(schedule.configs.size());
  int64_t idx = schedule.dwell_us > 0 ? sim_time_us / schedule.dwell_us : 0;
  if (schedule.cyclic) return static_cast<int>(idx % n);
  return static_cast<int>(std::min(idx, n - 1));
}

void apply_config(const SliceConfig& config, SliceTree& tree, std::vector<UeContext>& ues) {
  for (const auto& [fruit_id, ratios] : config.fruit_ratios) {
    if (FruitSlice* f = tree.find_fruit(fruit_id)) {
      f->min_ratio = ratios.first;
      f->max_ratio = ratios.second;
    }
  }
  for (auto& ue : ues) {
    auto it = config.ue_fruit.find(ue.ue_id);
    if (it == config.ue_fruit.end()) continue;
    ue.fruit_id = it->second;
    ue.unknown_fruit_flag = !it->second.empty() && tree.find_fruit(it->second) == nullptr;
  }
}

namespace {

double ladder_step(const std::vector<double>& ladder, double current, int direction) {
  if (ladder.empty()) return current;
  std::vector<double> rungs = ladder;
  std::sort(rungs.begin(), rungs.end());
  if (direction > 0) {
    for (double r : rungs)
      if (r > current + 1e-12) return r;
    return rungs.back();
  }
  for (auto it = rungs.rbegin(); it != rungs.rend(); ++it)
    if (*it < current - 1e-12) return *it;
  return rungs.front();
}

}  // namespace

std::vector<RatioChange> embedded_policy(const std::vector<SliceWindowStats>& stats,
                                         const SliceTree& tree,
                                         const std::vector<double>& ladder, double high_water,
                                         double low_water) {
  std::vector<RatioChange> changes;
  for (const auto& st : stats) {
    const FruitSlice* fruit = tree.find_fruit(st.slice_id);
    if (!fruit) continue;
    int direction = 0;
    if (st.max_occupancy_bytes <= 0.0) {
      direction = -1;  // idle window
    } else if (st.mean_occupancy_bytes > high_water * st.max_occupancy_bytes) {
      direction = 1;
    } else if (st.mean_occupancy_bytes < low_water * st.max_occupancy_bytes) {
      direction = -1;
    }
    if (direction == 0) continue;
    double next = ladder_step(ladder, fruit->max_ratio, direction);
    next = std::max(next, fruit->min_ratio);
    if (std::abs(next - fruit->max_ratio) > 1e-12)
      changes.push_back({st.slice_id, next});
  }
  return changes;
}

// ---- separated-mode wire codec ---------------------------------------------

using json = nlohmann::ordered_json;

std::string encode_snapshot(const Snapshot& snap) {
  json j;
  j["epoch"] = snap.epoch;
  json slices = json::object();
  for (const auto& [id, s] : snap.slices) {
    slices[id] = {{"quota_prbs", s.quota_prbs},
                  {"served_bytes", s.served_bytes},
                  {"mean_latency_us", s.mean_latency_us},
                  {"buffer_bytes", s.buffer_bytes}};
  }
  j["slices"] = std::move(slices);
  json ues = json::object();
  for (const auto& [id, u] : snap.ues)
    ues[std::to_string(id)] = {{"cqi", u.cqi}, {"mcs", u.mcs}};
  j["ues"] = std::move(ues);
  return j.dump();
}

std::optional<Snapshot> parse_snapshot(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("epoch") ||
      !j["epoch"].is_number_integer())
    return std::nullopt;
  Snapshot snap;
  snap.epoch = j["epoch"].get<int64_t>();
  if (j.contains("slices") && j["slices"].is_object()) {
    for (const auto& [id, s] : j["slices"].items()) {
      SnapshotSlice slice;
      slice.quota_prbs = s.value("quota_prbs", 0);
      slice.served_bytes = s.value("served_bytes", static_cast<int64_t>(0));
      slice.mean_latency_us = s.value("mean_latency_us", 0.0);
      slice.buffer_bytes = s.value("buffer_bytes", static_cast<int64_t>(0));
      snap.slices[id] = slice;
    }
  }
  if (j.contains("ues") && j["ues"].is_object()) {
    for (const auto& [id, u] : j["ues"].items()) {
      UeSnapshot us;
      us.cqi = u.value("cqi", 0);
      us.mcs = u.value("mcs", 0);
      snap.ues[std::stoi(id)] = us;
    }
  }
  return snap;
}

std::string encode_update(const RatioUpdate& update) {
  json j;
  j["epoch"] = update.epoch;
  json slices = json::object();
  for (const auto& [id, mm] : update.ratios)
    slices[id] = {{"min_ratio", mm.first}, {"max_ratio", mm.second}};
  j["slices"] = std::move(slices);
  return j.dump();
}

std::optional<RatioUpdate> parse_update(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("epoch") ||
      !j["epoch"].is_number_integer() || !j.contains("slices") || !j["slices"].is_object())
    return std::nullopt;
  RatioUpdate update;
  update.epoch = j["epoch"].get<int64_t>();
  for (const auto& [id, s] : j["slices"].items()) {
    if (!s.is_object() || !s.contains("min_ratio") || !s.contains("max_ratio") ||
        !s["min_ratio"].is_number() || !s["max_ratio"].is_number())
      return std::nullopt;
    update.ratios[id] = {s["min_ratio"].get<double>(), s["max_ratio"].get<double>()};
  }
  return update;
}

std::optional<std::string> ratio_update_problem(const RatioUpdate& update,
                                                const SliceTree& tree) {
  SliceTree patched = tree;
  for (const auto& [fruit_id, mm] : update.ratios) {
    FruitSlice* f = patched.find_fruit(fruit_id);
    if (!f) return "unknown fruit '" + fruit_id + "'";
    if (mm.first < 0.0 || mm.second > 1.0) return "ratio outside [0, 1] for '" + fruit_id + "'";
    if (mm.first > mm.second) return "min_ratio > max_ratio for '" + fruit_id + "'";
    f->min_ratio = mm.first;
    f->max_ratio = mm.second;
  }
  ValidationReport rep = validate_slice_tree(patched);
  if (!rep.ok()) return rep.violations.front().message;
  return std::nullopt;
}

SeparatedProtocol::EpochResult SeparatedProtocol::step_epoch(const Snapshot& snap,
                                                             OptimizerTransport& transport,
                                                             const SliceTree& tree) {
  EpochResult result;
  bool got_line = false;
  while (auto line = transport.poll_line()) {
    got_line = true;
    auto update = parse_update(*line);
    if (!update) {
      result.rejected = true;
      result.reject_reason = "malformed update";
      continue;
    }
    if (update->epoch != last_sent_epoch_) {
      result.rejected = true;
      result.reject_reason = "epoch mismatch";
      continue;
    }
    if (auto problem = ratio_update_problem(*update, tree)) {
      result.rejected = true;
      result.reject_reason = *problem;
      continue;
    }
    result.accepted = *update;  // later valid updates supersede earlier ones
  }

  if (result.accepted) {
    silent_epochs_ = 0;
    fallback_ = false;
  } else if (sent_any_) {
    if (got_line) {
      silent_epochs_ = 0;
    } else {
      ++silent_epochs_;
      if (silent_epochs_ >= cfg_.timeout_epochs && !fallback_) {
        fallback_ = true;
        ++fallback_events_;
      }
    }
  }
  result.use_embedded = fallback_ || (result.rejected && !result.accepted);

  transport.send_line(encode_snapshot(snap));
  sent_any_ = true;
  last_sent_epoch_ = snap.epoch;
  return result;
}

// ---- UCB -------------------------------------------------------------------

double reward_from_latency(int64_t latency_us, int64_t target_us) {
  return latency_us <= target_us ? 1.0 : 0.0;
}

double UcbSelector::score(size_t arm) const {
  if (count_[arm] == 0) return std::numeric_limits<double>::infinity();
  double t = static_cast<double>(total_);
  return mean_[arm] + std::sqrt(2.0 * std::log(t) / static_cast<double>(count_[arm]));
}

size_t UcbSelector::select() const {
  for (size_t i = 0; i < count_.size(); ++i)
    if (count_[i] == 0) return i;
  size_t best = 0;
  double best_score = score(0);
  for (size_t i = 1; i < count_.size(); ++i) {
    double s = score(i);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

void UcbSelector::update(size_t arm, double reward) {
  ++count_[arm];
  ++total_;
  mean_[arm] += (reward - mean_[arm]) / static_cast<double>(count_[arm]);
}

}  // namespace slicesim
