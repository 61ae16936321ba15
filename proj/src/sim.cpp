#include "slicesim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace slicesim {

namespace {

std::string make_imsi(int ue_id) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "00101%010d", ue_id);
  return buf;
}

double us_to_ms(int64_t us) { return static_cast<double>(us) / 1000.0; }

}  // namespace

Simulation::Simulation(Scenario scenario, OptimizerTransport* optimizer)
    : sc_(std::move(scenario)),
      opt_(optimizer),
      tree_(sc_.tree),
      mac_(sc_.mac),
      proto_(ProtocolConfig{sc_.control.timeout_epochs}),
      jit_ue_(Rng::substream(sc_.seed, "jitter/ue")),
      jit_ran_(Rng::substream(sc_.seed, "jitter/ran")),
      jit_server_(Rng::substream(sc_.seed, "jitter/server")) {
  if (sc_.control.mode == ControlMode::separated && !opt_)
    throw std::invalid_argument("separated control mode needs an optimizer transport");
  for (const ModelProfile& m : sc_.models) {
    model_wire_id_[m.name] = static_cast<uint8_t>(models_.size() & 0xff);
    models_[m.name] = m;
  }
  server_ = std::make_unique<LlmServer>(sc_.server, models_);
  clock_.slots_per_frame = sc_.slots_per_frame;
  clock_.slot_duration_us = sc_.slot_duration_us;
  if (sc_.control.mode == ControlMode::ucb) ucb_.emplace(sc_.control.ucb.arms.size());
  create_ues();
}

void Simulation::create_ues() {
  int total = sc_.total_ue_count();
  int ue_id = 0;
  for (const UeGroupSpec& g : sc_.ue_groups) {
    for (int k = 0; k < g.count; ++k, ++ue_id) {
      UeContext ue;
      ue.ue_id = ue_id;
      ue.imsi = make_imsi(ue_id);
      ue.rnti = 0x4601u + static_cast<uint32_t>(ue_id);
      ue.branch_id = g.branch_id;
      ue.fruit_id = g.fruit_id;
      ue.channel_model = g.channel;
      ue.profile = g.profile;
      if (ue.branch_id.empty() && !ue.fruit_id.empty()) {
        const FruitSlice* f = tree_.find_fruit(ue.fruit_id);
        ue.branch_id = f->parent_branch;
      }
      ue.channel.snr_db = g.channel.snr_mean_db;

      UeRuntime rt;
      rt.traffic_rng = Rng::substream(sc_.seed, "traffic", static_cast<uint64_t>(ue_id));
      rt.next_request_us =
          g.profile.request_period_us * static_cast<int64_t>(ue_id) / std::max(total, 1);

      mac_rngs_.push_back(Rng::substream(sc_.seed, "channel", static_cast<uint64_t>(ue_id)));
      step_channel(ue.channel, ue.channel_model, mac_rngs_.back());
      ues_.push_back(std::move(ue));
      rt_.push_back(std::move(rt));
    }
  }
}

const ModelProfile& Simulation::model_for(const Session& s) const { return models_.at(s.model); }

void Simulation::spawn_requests(int64_t now_us) {
  for (size_t i = 0; i < ues_.size(); ++i) {
    UeContext& ue = ues_[i];
    UeRuntime& rt = rt_[i];
    while (rt.next_request_us <= now_us) {
      auto owned = std::make_unique<Session>(next_request(ue, rt.next_request_us, rt.traffic_rng));
      Session* s = owned.get();
      s->request_id = next_request_id_++;
      s->config_index = current_config_;

      const FruitSlice* fruit =
          ue.fruit_id.empty() ? nullptr : tree_.find_fruit(ue.fruit_id);
      if (fruit) {
        s->model = fruit->llm_model;
        TunnelEnvelope env;
        env.llm_service_id = model_wire_id_.at(s->model);
        env.fruit_slice_id = static_cast<uint8_t>(fruit->numeric_id);
        uint64_t rid = static_cast<uint64_t>(s->request_id);
        env.payload = {static_cast<uint8_t>(rid >> 24), static_cast<uint8_t>(rid >> 16),
                       static_cast<uint8_t>(rid >> 8), static_cast<uint8_t>(rid)};
        EnvelopeDecode dec = decode_envelope(encode_envelope(env));
        SliceMapping mapping = dec.ok ? map_ue_to_slices(dec.envelope, ue, tree_)
                                      : SliceMapping{ue.branch_id, ue.fruit_id, false};
        s->slice_id = mapping.fruit_id.empty() ? mapping.branch_id : mapping.fruit_id;
      } else {
        s->model = sc_.default_model;
        const BranchSlice* branch = determine_branch(ue, tree_);
        s->slice_id = branch ? branch->id : std::string{};
      }

      ResponsePlan plan = plan_response(*s, model_for(*s), rt.traffic_rng);
      s->input_tokens = plan.input_tokens;
      s->output_tokens = plan.output_tokens;
      s->response_bytes = plan.response_bytes;
      plans_[s] = std::move(plan);
      dl_remaining_[s] = s->response_bytes;

      rt.ul_fifo.emplace_back(s, s->request_bytes);
      ue.ul_buffer_bytes += s->request_bytes;
      ++summary_.requests_created;
      sessions_.push_back(std::move(owned));
      rt.next_request_us += ue.profile.request_period_us;
    }
  }
}

void Simulation::fail_session(Session* s, const std::string& reason) {
  s->status = SessionStatus::failed;
  s->fail_reason = reason;
  ++summary_.sessions_failed;
  if (reason == "overload") ++summary_.overload_failures;
  plans_.erase(s);
  dl_remaining_.erase(s);
}

void Simulation::handle_inference_done(Session* s, int64_t now_us) {
  auto it = plans_.find(s);
  if (it != plans_.end()) {
    int idx = -1;
    for (size_t i = 0; i < ues_.size(); ++i)
      if (ues_[i].ue_id == s->ue_id) idx = static_cast<int>(i);
    for (const EmissionEvent& ev : it->second.emissions) {
      injections_.push(Injection{s->inference_done_us + ev.offset_us, injection_seq_++, idx, s,
                                 ev.bytes});
    }
    plans_.erase(it);
  }

  const ModelProfile& m = model_for(*s);
  ServerRecord rec;
  rec.timestamp_ms = us_to_ms(observed_timestamp_us(s->inference_done_us, jit_server_,
                                                    sc_.metrics.jitter));
  rec.llm_inference_time_ms = us_to_ms(s->inference_done_us - s->inference_start_us);
  rec.server_processing_time_ms =
      rec.llm_inference_time_ms + us_to_ms(sc_.server.processing_overhead_us);
  rec.input_tokens = s->input_tokens;
  rec.output_tokens = s->output_tokens;
  if (s->cold_start) {
    rec.cold_start_time_ms = us_to_ms(m.warm_base_us + m.cold_extra_us);
    rec.warm_start_time_ms = 0;
  } else {
    rec.cold_start_time_ms = 0;
    rec.warm_start_time_ms = us_to_ms(m.warm_base_us);
  }
  rec.gpu_utilization_pct =
      100.0 * server_->gpu_utilization(now_us, std::max<int64_t>(now_us, 1));
  rec.vram_usage_mb = std::llround(m.param_count_b * 2048.0);
  records_.server.push_back(rec);
}

void Simulation::handle_completion(Session* s, int64_t now_us) {
  s->downlink_done_us = now_us;
  s->status = SessionStatus::complete;
  dl_remaining_.erase(s);
  ++summary_.sessions_completed;

  LatencyBreakdown b = latency_breakdown(*s);
  latencies_us_.push_back(b.total_us);
  share_ul_sum_ += b.uplink_share;
  share_inf_sum_ += b.inference_share;
  share_dl_sum_ += b.downlink_share;

  const ModelProfile& m = model_for(*s);
  double rdv = static_cast<double>(s->request_bytes);
  double resources = static_cast<double>(std::max<int64_t>(s->scheduled_ul_bytes, 1));
  double latency_s = static_cast<double>(b.total_us) * 1e-6;
  double v_larei = larei(rdv, m.param_count_b, resources, latency_s);
  double v_lseq = lseq(rdv, 0.0, m.param_count_b, resources);
  larei_sum_ += v_larei;
  lseq_sum_ += v_lseq;
  larei_slice_sum_[s->slice_id] += v_larei;
  lseq_slice_sum_[s->slice_id] += v_lseq;
  latency_slice_sum_[s->slice_id] += static_cast<double>(b.total_us);
  completed_slice_[s->slice_id] += 1;

  window_[s->slice_id].latency_sum_us += static_cast<double>(b.total_us);
  window_[s->slice_id].latency_count += 1;
  ++episode_completions_;
  episode_latency_sum_us_ += static_cast<double>(b.total_us);

  const UeContext* ue = nullptr;
  for (const UeContext& u : ues_)
    if (u.ue_id == s->ue_id) ue = &u;

  UeRecord rec;
  rec.timestamp_ms =
      us_to_ms(observed_timestamp_us(s->request_created_us, jit_ue_, sc_.metrics.jitter));
  rec.uplink_time_ms = us_to_ms(b.uplink_us);
  rec.downlink_time_ms = us_to_ms(b.downlink_us);
  rec.wireless_comm_time_ms = rec.uplink_time_ms + rec.downlink_time_ms;
  rec.total_comm_time_ms = us_to_ms(b.total_us);
  if (s->mode == RequestMode::image_request) {
    rec.tx_image_resolution =
        std::to_string(s->tx_width) + "x" + std::to_string(s->tx_height);
  }
  rec.expected_word_count = s->expected_words;
  rec.actual_word_count =
      static_cast<int>(std::llround(static_cast<double>(s->output_tokens) / m.tokens_per_word));
  rec.llm_model = s->model;
  rec.request_mode = to_string(s->mode);
  rec.upload_periodicity_ms = ue ? us_to_ms(ue->profile.request_period_us) : 0;
  rec.downlink_text_size = s->response_bytes;
  rec.uplink_bytes = s->request_bytes;
  rec.downlink_bytes = s->response_bytes;
  rec.queue_time_ms = us_to_ms(b.queue_us);
  records_.ue.push_back(std::move(rec));
}

std::vector<SliceWindowStats> Simulation::window_stats() const {
  std::vector<SliceWindowStats> out;
  int64_t slots = std::max<int64_t>(window_slots_, 1);
  for (const BranchSlice& b : tree_.branches) {
    for (const FruitSlice& f : b.fruits) {
      SliceWindowStats st;
      st.slice_id = f.id;
      auto it = window_.find(f.id);
      if (it != window_.end()) {
        const SliceWindow& w = it->second;
        st.mean_occupancy_bytes = w.occupancy_sum / static_cast<double>(slots);
        st.max_occupancy_bytes = w.occupancy_max;
        st.served_bytes = w.served_bytes;
        st.mean_latency_us =
            w.latency_count > 0 ? w.latency_sum_us / static_cast<double>(w.latency_count) : 0.0;
        st.quota_prbs = w.quota_prbs;
        st.buffer_bytes = w.buffer_bytes;
      }
      out.push_back(std::move(st));
    }
  }
  return out;
}

void Simulation::reset_window() {
  window_.clear();
  window_slots_ = 0;
}

void Simulation::accumulate_window(const SlotOutcome& outcome) {
  ++window_slots_;
  std::map<std::string, int64_t> occupancy;
  for (const UeContext& ue : ues_) {
    if (ue.fruit_id.empty()) continue;
    occupancy[ue.fruit_id] += ue.ul_buffer_bytes + ue.dl_buffer_bytes;
  }
  for (const BranchSlice& b : tree_.branches) {
    for (const FruitSlice& f : b.fruits) {
      SliceWindow& w = window_[f.id];
      double occ = static_cast<double>(occupancy.count(f.id) ? occupancy.at(f.id) : 0);
      w.occupancy_sum += occ;
      w.occupancy_max = std::max(w.occupancy_max, occ);
      w.buffer_bytes = static_cast<int64_t>(occ);
      int quota = 0;
      if (auto it = outcome.ul_alloc.group_quota.find(f.id);
          it != outcome.ul_alloc.group_quota.end())
        quota += it->second;
      if (auto it = outcome.dl_alloc.group_quota.find(f.id);
          it != outcome.dl_alloc.group_quota.end())
        quota += it->second;
      w.quota_prbs = quota;
    }
  }
  for (const SlotGrant& g : outcome.grants)
    if (g.delivered) window_[g.slice_id].served_bytes += g.payload_bytes;
}

void Simulation::run_ucb_boundary() {
  const UcbSettings& u = sc_.control.ucb;
  if (arm_active_) {
    if (episode_completions_ == 0) return;  // extend the episode
    double mean = episode_latency_sum_us_ / static_cast<double>(episode_completions_);
    double reward =
        reward_from_latency(static_cast<int64_t>(std::llround(mean)), u.target_latency_us);
    ucb_->update(current_arm_, reward);
    summary_.ucb_episodes.push_back(UcbEpisode{current_arm_, reward, episode_completions_});
    episode_completions_ = 0;
    episode_latency_sum_us_ = 0;
  }
  current_arm_ = ucb_->select();
  arm_active_ = true;
  apply_config(u.arms[static_cast<size_t>(current_arm_)], tree_, ues_);
}

void Simulation::run_control(int64_t now_us) {
  ControlSettings& c = sc_.control;
  switch (c.mode) {
    case ControlMode::none:
      return;
    case ControlMode::timed: {
      int idx = schedule_index_at(c.schedule, now_us);
      if (idx >= 0 && idx != current_config_) {
        apply_config(c.schedule.configs[static_cast<size_t>(idx)], tree_, ues_);
        current_config_ = idx;
        ++summary_.config_switches;
      }
      return;
    }
    case ControlMode::embedded: {
      if (clock_.completed_slots == 0 || clock_.completed_slots % c.epoch_slots != 0) return;
      std::vector<SliceWindowStats> stats = window_stats();
      for (const RatioChange& ch : embedded_policy(stats, tree_, c.ladder, c.high_water,
                                                   c.low_water)) {
        if (FruitSlice* f = tree_.find_fruit(ch.slice_id)) f->max_ratio = ch.new_max_ratio;
      }
      reset_window();
      return;
    }
    case ControlMode::separated: {
      if (clock_.completed_slots == 0 || clock_.completed_slots % c.epoch_slots != 0) return;
      std::vector<SliceWindowStats> stats = window_stats();
      Snapshot snap;
      snap.epoch = epoch_counter_++;
      for (const SliceWindowStats& st : stats) {
        snap.slices[st.slice_id] = SnapshotSlice{st.quota_prbs, st.served_bytes,
                                                 st.mean_latency_us, st.buffer_bytes};
      }
      for (const UeContext& ue : ues_)
        snap.ues[ue.ue_id] = UeSnapshot{ue.channel.cqi, ue.channel.ul_mcs};
      SeparatedProtocol::EpochResult res = proto_.step_epoch(snap, *opt_, tree_);
      if (res.accepted) {
        for (const auto& [fruit, ratios] : res.accepted->ratios) {
          if (FruitSlice* f = tree_.find_fruit(fruit)) {
            f->min_ratio = ratios.first;
            f->max_ratio = ratios.second;
          }
        }
        ++summary_.accepted_updates;
      }
      if (res.rejected) ++summary_.rejected_updates;
      if (res.use_embedded) {
        for (const RatioChange& ch : embedded_policy(stats, tree_, c.ladder, c.high_water,
                                                     c.low_water)) {
          if (FruitSlice* f = tree_.find_fruit(ch.slice_id)) f->max_ratio = ch.new_max_ratio;
        }
      }
      summary_.fallback_events = proto_.fallback_events();
      reset_window();
      return;
    }
    case ControlMode::ucb: {
      if (clock_.completed_slots % c.ucb.episode_slots != 0) return;
      run_ucb_boundary();
      return;
    }
  }
}

void Simulation::credit_grants(const SlotOutcome& outcome, int64_t slot_end_us) {
  for (size_t i = 0; i < rt_.size(); ++i) {
    UeRuntime& rt = rt_[i];
    rt.slot_ul_tbs = rt.slot_dl_tbs = 0;
    rt.slot_ul_bytes = rt.slot_dl_bytes = 0;
    rt.slot_ul_rbs = rt.slot_dl_rbs = 0;
    rt.slot_ul_sdus = 0;
    rt.slot_granted = false;
  }
  std::map<int, size_t> ue_index;
  for (size_t i = 0; i < ues_.size(); ++i) ue_index[ues_[i].ue_id] = i;

  for (const SlotGrant& g : outcome.grants) {
    size_t i = ue_index.at(g.ue_id);
    UeRuntime& rt = rt_[i];
    rt.slot_granted = true;
    if (g.direction == Direction::uplink) {
      rt.slot_ul_tbs += g.tbs_bytes;
      rt.slot_ul_rbs += g.n_prbs;
      if (!rt.ul_fifo.empty()) rt.ul_fifo.front().first->scheduled_ul_bytes += g.tbs_bytes;
      if (g.retransmission) ++summary_.harq_retransmissions;
      if (!g.delivered) continue;
      rt.slot_ul_bytes += g.payload_bytes;
      ++rt.slot_ul_sdus;
      int64_t credit = g.payload_bytes;
      while (credit > 0 && !rt.ul_fifo.empty()) {
        auto& [sess, remaining] = rt.ul_fifo.front();
        int64_t d = std::min(credit, remaining);
        remaining -= d;
        credit -= d;
        if (remaining == 0) {
          Session* done = sess;
          rt.ul_fifo.pop_front();
          done->uplink_done_us = slot_end_us;
          if (!server_->enqueue(done, slot_end_us)) fail_session(done, "overload");
        }
      }
    } else {
      rt.slot_dl_tbs += g.tbs_bytes;
      rt.slot_dl_rbs += g.n_prbs;
      if (g.retransmission) ++summary_.harq_retransmissions;
      if (!g.delivered) continue;
      rt.slot_dl_bytes += g.payload_bytes;
      ++rt.dl_pdus_total;
      int64_t credit = g.payload_bytes;
      while (credit > 0 && !rt.dl_fifo.empty()) {
        auto& [sess, remaining] = rt.dl_fifo.front();
        int64_t d = std::min(credit, remaining);
        remaining -= d;
        credit -= d;
        Session* done = sess;
        if (remaining == 0) rt.dl_fifo.pop_front();
        auto rem_it = dl_remaining_.find(done);
        if (rem_it != dl_remaining_.end()) {
          rem_it->second -= d;
          if (rem_it->second <= 0) handle_completion(done, slot_end_us);
        }
      }
    }
  }
}

void Simulation::emit_ran_records(const SlotOutcome& outcome, int64_t slot_start_us) {
  (void)outcome;
  bool heartbeat = sc_.metrics.ran_heartbeat_slots > 0 &&
                   clock_.completed_slots % sc_.metrics.ran_heartbeat_slots == 0;
  for (size_t i = 0; i < ues_.size(); ++i) {
    const UeContext& ue = ues_[i];
    const UeRuntime& rt = rt_[i];
    if (!rt.slot_granted && !heartbeat) continue;

    RanRecord r;
    r.gnb_timestamp_ms =
        us_to_ms(observed_timestamp_us(slot_start_us, jit_ran_, sc_.metrics.jitter));
    r.frame_number = clock_.frame;
    r.slot_number = clock_.slot;
    r.imsi = ue.imsi;
    r.rnti = ue.rnti;
    r.ue_id = ue.ue_id;
    r.ue_number = ue.ue_id;
    r.dl_throughput_mbps =
        static_cast<double>(rt.slot_dl_bytes) * 8.0 / static_cast<double>(clock_.slot_duration_us);
    r.ul_throughput_mbps =
        static_cast<double>(rt.slot_ul_bytes) * 8.0 / static_cast<double>(clock_.slot_duration_us);
    r.ph_db = ue.channel.ph_db;
    r.pcmax_dbm = ue.channel.pcmax_dbm;
    r.avg_rsrp_dbm = ue.channel.rsrp_dbm;
    r.cqi = ue.channel.cqi;
    r.ri = ue.channel.ri;
    r.dl_mcs = ue.channel.dl_mcs;
    r.ul_mcs = ue.channel.ul_mcs;
    r.scheduled_ul_bytes = rt.slot_ul_tbs;
    r.estimated_ul_buffer = ue.ul_buffer_bytes;
    r.dl_pdus_total = rt.dl_pdus_total;
    r.dl_bler_pct = ue.channel.dl_bler * 100.0;
    r.ul_bler_pct = ue.channel.ul_bler * 100.0;
    r.dl_sch_bytes = rt.slot_dl_tbs;
    r.dl_sch_rbs = rt.slot_dl_rbs;
    r.ul_sch_bytes = rt.slot_ul_tbs;
    r.ul_sch_rbs = rt.slot_ul_rbs;
    r.ul_mac_sdus = rt.slot_ul_sdus;

    const FruitSlice* fruit = ue.fruit_id.empty() ? nullptr : tree_.find_fruit(ue.fruit_id);
    const BranchSlice* branch = determine_branch(ue, tree_);
    if (fruit) {
      r.primary_slice_max_pct = fruit->max_ratio * 100.0;
      r.primary_slice_min_pct = fruit->min_ratio * 100.0;
      if (branch) {
        r.has_secondary = true;
        r.secondary_slice_max_pct = branch->max_ratio * 100.0;
        r.secondary_slice_min_pct = branch->min_ratio * 100.0;
      }
    } else if (branch) {
      r.primary_slice_max_pct = branch->max_ratio * 100.0;
      r.primary_slice_min_pct = branch->min_ratio * 100.0;
    }
    records_.ran.push_back(std::move(r));
  }
}

RunResult Simulation::run() {
  summary_.scenario_name = sc_.name;
  summary_.control_mode = to_string(sc_.control.mode);
  summary_.seed = sc_.seed;
  summary_.duration_slots = sc_.duration_slots;
  summary_.total_ues = sc_.total_ue_count();

  for (int64_t slot = 0; slot < sc_.duration_slots; ++slot) {
    int64_t now = clock_.sim_time_us;
    int64_t slot_end = now + clock_.slot_duration_us;

    for (Session* s : server_->advance(now)) handle_inference_done(s, now);

    while (!injections_.empty() && injections_.top().at_us <= now) {
      Injection inj = injections_.top();
      injections_.pop();
      if (inj.session->status == SessionStatus::failed) continue;
      if (inj.ue_index >= 0) {
        ues_[static_cast<size_t>(inj.ue_index)].dl_buffer_bytes += inj.bytes;
        rt_[static_cast<size_t>(inj.ue_index)].dl_fifo.emplace_back(inj.session, inj.bytes);
      }
    }

    run_control(now);
    spawn_requests(now);

    SlotOutcome outcome = mac_.run_slot(tree_, ues_, clock_, mac_rngs_);
    credit_grants(outcome, slot_end);
    accumulate_window(outcome);

    summary_.ul_granted_prbs += outcome.ul_granted_prbs;
    summary_.dl_granted_prbs += outcome.dl_granted_prbs;
    summary_.ul_unused_prbs += outcome.ul_unused_prbs;
    summary_.dl_unused_prbs += outcome.dl_unused_prbs;

    emit_ran_records(outcome, now);
    advance_clock(clock_);
  }

  int64_t end_us = clock_.sim_time_us;
  for (Session* s : server_->advance(end_us)) handle_inference_done(s, end_us);

  summary_.sim_time_us = end_us;
  if (summary_.requests_created > 0) {
    summary_.completion_rate = static_cast<double>(summary_.sessions_completed) /
                               static_cast<double>(summary_.requests_created);
  }
  if (!latencies_us_.empty()) {
    double n = static_cast<double>(latencies_us_.size());
    double sum = 0;
    for (int64_t v : latencies_us_) sum += static_cast<double>(v);
    summary_.mean_latency_us = sum / n;
    std::vector<int64_t> sorted = latencies_us_;
    std::sort(sorted.begin(), sorted.end());
    size_t idx = static_cast<size_t>(
        std::max<int64_t>(0, static_cast<int64_t>(std::ceil(0.95 * n)) - 1));
    summary_.p95_latency_us = static_cast<double>(sorted[std::min(idx, sorted.size() - 1)]);
    summary_.mean_uplink_share = share_ul_sum_ / n;
    summary_.mean_inference_share = share_inf_sum_ / n;
    summary_.mean_downlink_share = share_dl_sum_ / n;
    summary_.larei_mean = larei_sum_ / n;
    summary_.lseq_mean = lseq_sum_ / n;
  }
  for (const auto& [slice, count] : completed_slice_) {
    summary_.completed_by_slice[slice] = count;
    double dn = static_cast<double>(count);
    summary_.larei_by_slice[slice] = larei_slice_sum_[slice] / dn;
    summary_.lseq_by_slice[slice] = lseq_slice_sum_[slice] / dn;
    summary_.mean_latency_us_by_slice[slice] = latency_slice_sum_[slice] / dn;
  }
  summary_.gpu_utilization =
      end_us > 0 ? server_->gpu_utilization(end_us, end_us) : 0.0;
  if (ucb_) {
    summary_.ucb_pulls = ucb_->counts();
    summary_.ucb_means = ucb_->means();
  }
  summary_.fallback_events = proto_.fallback_events();
  for (const UeContext& ue : ues_)
    summary_.ue_slice[ue.ue_id] = ue.fruit_id.empty() ? ue.branch_id : ue.fruit_id;

  RunResult result;
  result.records = std::move(records_);
  result.summary = std::move(summary_);
  result.sessions = std::move(sessions_);
  return result;
}

}  // namespace slicesim
