#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <deque>

#include "slicesim/control.hpp"
#include "slicesim/rng.hpp"

using namespace slicesim;

namespace {

SliceTree small_tree() {
  SliceTree tree;
  tree.total_prbs = 51;
  BranchSlice b;
  b.id = "embb";
  b.min_ratio = 0.1;
  b.max_ratio = 1.0;
  FruitSlice f0;
  f0.id = "gold";
  f0.numeric_id = 2;
  f0.parent_branch = "embb";
  f0.min_ratio = 0.1;
  f0.max_ratio = 0.6;
  f0.llm_model = "m";
  FruitSlice f1;
  f1.id = "silver";
  f1.numeric_id = 3;
  f1.parent_branch = "embb";
  f1.min_ratio = 0.0;
  f1.max_ratio = 0.6;
  f1.llm_model = "m";
  b.fruits = {f0, f1};
  tree.branches.push_back(b);
  return tree;
}

class FakeTransport : public OptimizerTransport {
 public:
  void send_line(const std::string& line) override { sent.push_back(line); }
  std::optional<std::string> poll_line() override {
    if (inbox.empty()) return std::nullopt;
    std::string line = inbox.front();
    inbox.pop_front();
    return line;
  }
  bool alive() override { return true; }

  std::vector<std::string> sent;
  std::deque<std::string> inbox;
};

}  // namespace

TEST_CASE("envelope encoding matches the wire layout byte for byte") {
  TunnelEnvelope env;
  env.llm_service_id = 7;
  env.fruit_slice_id = 2;
  env.payload = {'h', 'e', 'l', 'l', 'o'};
  std::vector<uint8_t> wire = encode_envelope(env);
  std::vector<uint8_t> expect = {0x57, 0x4C, 0x01, 0x07, 0x02, 0x00, 0x00,
                                 0x00, 0x05, 0x68, 0x65, 0x6C, 0x6C, 0x6F};
  CHECK(wire == expect);
}

TEST_CASE("envelope decode inverts encode for random payloads") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    TunnelEnvelope env;
    env.llm_service_id = static_cast<uint8_t>(rng.uniform_int(0, 255));
    env.fruit_slice_id = static_cast<uint8_t>(rng.uniform_int(0, 255));
    size_t len = static_cast<size_t>(rng.uniform_int(0, 65'536));
    env.payload.resize(len);
    for (auto& b : env.payload) b = static_cast<uint8_t>(rng.uniform_int(0, 255));
    EnvelopeDecode dec = decode_envelope(encode_envelope(env));
    REQUIRE(dec.ok);
    CHECK(dec.envelope.llm_service_id == env.llm_service_id);
    CHECK(dec.envelope.fruit_slice_id == env.fruit_slice_id);
    CHECK(dec.envelope.payload == env.payload);
  }
  // the declared upper bound: one megabyte payload
  TunnelEnvelope big;
  big.payload.assign(1 << 20, 0xAB);
  EnvelopeDecode dec = decode_envelope(encode_envelope(big));
  REQUIRE(dec.ok);
  CHECK(dec.envelope.payload.size() == 1u << 20);
}

TEST_CASE("malformed envelopes are classified") {
  TunnelEnvelope env;
  env.payload = {1, 2, 3};
  std::vector<uint8_t> wire = encode_envelope(env);

  std::vector<uint8_t> truncated(wire.begin(), wire.begin() + 8);
  CHECK(decode_envelope(truncated).error == EnvelopeError::too_short);

  std::vector<uint8_t> bad_magic = wire;
  bad_magic[0] = 0x58;
  CHECK(decode_envelope(bad_magic).error == EnvelopeError::bad_magic);

  std::vector<uint8_t> bad_version = wire;
  bad_version[2] = 0x02;
  CHECK(decode_envelope(bad_version).error == EnvelopeError::bad_version);

  std::vector<uint8_t> short_payload = wire;
  short_payload.pop_back();
  CHECK(decode_envelope(short_payload).error == EnvelopeError::length_mismatch);
}

TEST_CASE("envelope fruit ids map onto tree slices") {
  SliceTree tree = small_tree();
  UeContext ue;
  ue.branch_id = "embb";

  TunnelEnvelope env;
  env.fruit_slice_id = 2;  // gold
  SliceMapping m = map_ue_to_slices(env, ue, tree);
  CHECK(m.branch_id == "embb");
  CHECK(m.fruit_id == "gold");
  CHECK_FALSE(m.unknown_fruit);

  env.fruit_slice_id = 99;
  m = map_ue_to_slices(env, ue, tree);
  CHECK(m.branch_id == "embb");
  CHECK(m.fruit_id.empty());  // branch default
  CHECK(m.unknown_fruit);
}

TEST_CASE("schedule index follows dwell boundaries") {
  SliceConfigSchedule sched;
  sched.dwell_us = 30'000'000;
  sched.configs.resize(3);
  CHECK(schedule_index_at(sched, 0) == 0);
  CHECK(schedule_index_at(sched, 29'999'999) == 0);
  CHECK(schedule_index_at(sched, 30'000'000) == 1);
  CHECK(schedule_index_at(sched, 65'000'000) == 2);

  SUBCASE("cyclic wraps") {
    sched.cyclic = true;
    CHECK(schedule_index_at(sched, 95'000'000) == 0);
    CHECK(schedule_index_at(sched, 125'000'000) == 1);
  }
  SUBCASE("non-cyclic holds the last config") {
    sched.cyclic = false;
    CHECK(schedule_index_at(sched, 95'000'000) == 2);
    CHECK(schedule_index_at(sched, 1'000'000'000) == 2);
  }
  SUBCASE("single config is constant forever") {
    sched.configs.resize(1);
    sched.cyclic = true;
    CHECK(schedule_index_at(sched, 0) == 0);
    CHECK(schedule_index_at(sched, 86'400'000'000LL) == 0);
  }
  SUBCASE("empty schedule reports no config") {
    sched.configs.clear();
    CHECK(schedule_index_at(sched, 0) == -1);
  }
}

TEST_CASE("apply_config rewrites ratios and ue mappings") {
  SliceTree tree = small_tree();
  std::vector<UeContext> ues(2);
  ues[0].ue_id = 0;
  ues[0].fruit_id = "gold";
  ues[1].ue_id = 1;

  SliceConfig cfg;
  cfg.fruit_ratios["gold"] = {0.2, 0.9};
  cfg.ue_fruit[0] = "";        // clears
  cfg.ue_fruit[1] = "silver";  // assigns
  apply_config(cfg, tree, ues);

  CHECK(tree.find_fruit("gold")->min_ratio == doctest::Approx(0.2));
  CHECK(tree.find_fruit("gold")->max_ratio == doctest::Approx(0.9));
  CHECK(tree.find_fruit("silver")->max_ratio == doctest::Approx(0.6));  // untouched
  CHECK(ues[0].fruit_id.empty());
  CHECK(ues[1].fruit_id == "silver");
}

TEST_CASE("embedded policy steps the ladder with hysteresis") {
  SliceTree tree = small_tree();
  tree.find_fruit("gold")->max_ratio = 0.6;
  std::vector<double> ladder = {0.3, 0.6, 0.9};

  SUBCASE("saturated window steps up, then holds at the top") {
    SliceWindowStats st;
    st.slice_id = "gold";
    st.mean_occupancy_bytes = 9'000;
    st.max_occupancy_bytes = 10'000;
    auto changes = embedded_policy({st}, tree, ladder);
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].new_max_ratio == doctest::Approx(0.9));
    tree.find_fruit("gold")->max_ratio = 0.9;
    CHECK(embedded_policy({st}, tree, ladder).empty());  // already at the top rung
  }

  SUBCASE("idle window steps down, then holds at the bottom") {
    SliceWindowStats st;
    st.slice_id = "gold";
    st.mean_occupancy_bytes = 0;
    st.max_occupancy_bytes = 0;
    auto changes = embedded_policy({st}, tree, ladder);
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].new_max_ratio == doctest::Approx(0.3));
    tree.find_fruit("gold")->max_ratio = 0.3;
    CHECK(embedded_policy({st}, tree, ladder).empty());
  }

  SUBCASE("mid-band occupancy holds") {
    SliceWindowStats st;
    st.slice_id = "gold";
    st.mean_occupancy_bytes = 5'000;
    st.max_occupancy_bytes = 10'000;
    CHECK(embedded_policy({st}, tree, ladder).empty());
  }

  SUBCASE("at most one rung per window even when far past the threshold") {
    SliceWindowStats st;
    st.slice_id = "gold";
    st.mean_occupancy_bytes = 10'000;
    st.max_occupancy_bytes = 10'000;
    tree.find_fruit("gold")->max_ratio = 0.3;
    auto changes = embedded_policy({st}, tree, ladder);
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].new_max_ratio == doctest::Approx(0.6));  // one step, not two
  }

  SUBCASE("the step down never undercuts the fruit's min ratio") {
    SliceWindowStats st;
    st.slice_id = "gold";
    st.mean_occupancy_bytes = 0;
    st.max_occupancy_bytes = 0;
    tree.find_fruit("gold")->min_ratio = 0.45;
    tree.find_fruit("gold")->max_ratio = 0.6;
    auto changes = embedded_policy({st}, tree, ladder);
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].new_max_ratio == doctest::Approx(0.45));
  }
}

TEST_CASE("snapshot and update survive the wire roundtrip") {
  Snapshot snap;
  snap.epoch = 5;
  snap.slices["gold"] = {12, 34'567, 890.5, 4'321};
  snap.ues[0] = {10, 18};
  snap.ues[3] = {7, 12};
  auto parsed = parse_snapshot(encode_snapshot(snap));
  REQUIRE(parsed.has_value());
  CHECK(parsed->epoch == 5);
  CHECK(parsed->slices.at("gold").served_bytes == 34'567);
  CHECK(parsed->ues.at(3).mcs == 12);

  RatioUpdate up;
  up.epoch = 5;
  up.ratios["gold"] = {0.1, 0.9};
  auto parsed_up = parse_update(encode_update(up));
  REQUIRE(parsed_up.has_value());
  CHECK(parsed_up->epoch == 5);
  CHECK(parsed_up->ratios.at("gold").second == doctest::Approx(0.9));

  CHECK_FALSE(parse_update("this is not an update").has_value());
  CHECK_FALSE(parse_snapshot("{\"epoch\": \"nope\"}").has_value());
}

TEST_CASE("ratio updates are vetted against the tree") {
  SliceTree tree = small_tree();
  RatioUpdate ok;
  ok.epoch = 0;
  ok.ratios["gold"] = {0.1, 0.5};
  CHECK_FALSE(ratio_update_problem(ok, tree).has_value());

  RatioUpdate inverted;
  inverted.ratios["gold"] = {0.8, 0.2};
  CHECK(ratio_update_problem(inverted, tree).has_value());

  RatioUpdate unknown;
  unknown.ratios["nope"] = {0.1, 0.5};
  CHECK(ratio_update_problem(unknown, tree).has_value());

  RatioUpdate out_of_range;
  out_of_range.ratios["gold"] = {0.1, 1.5};
  CHECK(ratio_update_problem(out_of_range, tree).has_value());
}

TEST_CASE("separated protocol applies valid epoch-matched updates") {
  SliceTree tree = small_tree();
  FakeTransport transport;
  SeparatedProtocol proto;

  Snapshot snap;
  snap.epoch = 0;
  auto r0 = proto.step_epoch(snap, transport, tree);
  CHECK_FALSE(r0.use_embedded);  // first-epoch silence is normal pipelining
  CHECK_FALSE(r0.rejected);
  REQUIRE(transport.sent.size() == 1);

  RatioUpdate up;
  up.epoch = 0;  // echoes the snapshot it answers
  up.ratios["gold"] = {0.1, 0.5};
  transport.inbox.push_back(encode_update(up));
  snap.epoch = 1;
  auto r1 = proto.step_epoch(snap, transport, tree);
  CHECK_FALSE(r1.use_embedded);
  REQUIRE(r1.accepted.has_value());
  CHECK(r1.accepted->ratios.at("gold").second == doctest::Approx(0.5));
  CHECK_FALSE(proto.in_fallback());
}

TEST_CASE("invalid updates are rejected and covered by the embedded policy") {
  SliceTree tree = small_tree();
  FakeTransport transport;
  SeparatedProtocol proto;

  Snapshot snap;
  snap.epoch = 0;
  proto.step_epoch(snap, transport, tree);

  RatioUpdate bad;
  bad.epoch = 0;
  bad.ratios["gold"] = {0.9, 0.2};  // min > max
  transport.inbox.push_back(encode_update(bad));
  snap.epoch = 1;
  auto r = proto.step_epoch(snap, transport, tree);
  CHECK(r.use_embedded);
  CHECK(r.rejected);
  CHECK_FALSE(r.accepted.has_value());
}

TEST_CASE("two silent epochs flip to sticky fallback until a valid echo") {
  SliceTree tree = small_tree();
  FakeTransport transport;
  SeparatedProtocol proto;

  Snapshot snap;
  snap.epoch = 0;
  proto.step_epoch(snap, transport, tree);  // sends epoch 0, no reply
  snap.epoch = 1;
  proto.step_epoch(snap, transport, tree);  // silence 1
  snap.epoch = 2;
  auto r2 = proto.step_epoch(snap, transport, tree);  // silence 2 -> fallback
  CHECK(r2.use_embedded);
  CHECK(proto.in_fallback());
  CHECK(proto.fallback_events() == 1);

  // still sending snapshots; a valid echo re-engages
  RatioUpdate up;
  up.epoch = 2;
  up.ratios["gold"] = {0.1, 0.4};
  transport.inbox.push_back(encode_update(up));
  snap.epoch = 3;
  auto r3 = proto.step_epoch(snap, transport, tree);
  REQUIRE(r3.accepted.has_value());
  CHECK_FALSE(proto.in_fallback());
}

TEST_CASE("stale epoch echoes are rejected") {
  SliceTree tree = small_tree();
  FakeTransport transport;
  SeparatedProtocol proto;

  Snapshot snap;
  snap.epoch = 0;
  proto.step_epoch(snap, transport, tree);
  snap.epoch = 1;
  proto.step_epoch(snap, transport, tree);

  RatioUpdate stale;
  stale.epoch = 0;  // answers an old snapshot
  stale.ratios["gold"] = {0.1, 0.5};
  transport.inbox.push_back(encode_update(stale));
  snap.epoch = 2;
  auto r = proto.step_epoch(snap, transport, tree);
  CHECK(r.use_embedded);
  CHECK(r.rejected);
}

TEST_CASE("reward is 1 up to and including the target") {
  CHECK(reward_from_latency(1'800'000, 2'000'000) == doctest::Approx(1.0));
  CHECK(reward_from_latency(2'500'000, 2'000'000) == doctest::Approx(0.0));
  CHECK(reward_from_latency(2'000'000, 2'000'000) == doctest::Approx(1.0));  // closed bound
}

TEST_CASE("unplayed arms are explored first in declaration order") {
  UcbSelector ucb(6);
  CHECK(ucb.select() == 0);
  ucb.update(0, 1.0);
  CHECK(ucb.select() == 1);
  ucb.update(1, 0.0);
  CHECK(ucb.select() == 2);
  CHECK(std::isinf(ucb.score(5)));
}

TEST_CASE("the ucb index matches the closed form") {
  UcbSelector ucb(2);
  // arm 0: five pulls with mean 0.5; arm 1: five pulls, total t = 10
  ucb.update(0, 1.0);
  ucb.update(0, 0.0);
  ucb.update(0, 1.0);
  ucb.update(0, 0.0);
  ucb.update(0, 0.5);
  for (int i = 0; i < 5; ++i) ucb.update(1, 0.0);
  REQUIRE(ucb.total_pulls() == 10);
  double expect = 0.5 + std::sqrt(2.0 * std::log(10.0) / 5.0);
  CHECK(ucb.score(0) == doctest::Approx(expect).epsilon(1e-4));
  CHECK(expect == doctest::Approx(1.4597).epsilon(1e-4));
}

TEST_CASE("running means and pull counts stay consistent") {
  UcbSelector ucb(3);
  ucb.update(2, 1.0);
  CHECK(ucb.means()[2] == doctest::Approx(1.0));
  CHECK(ucb.counts()[2] == 1);
  ucb.update(2, 0.0);
  CHECK(ucb.means()[2] == doctest::Approx(0.5));

  Rng rng(4);
  for (int i = 0; i < 500; ++i)
    ucb.update(static_cast<size_t>(rng.uniform_int(0, 2)), rng.bernoulli(0.5) ? 1.0 : 0.0);
  int64_t total = 0;
  for (int64_t c : ucb.counts()) total += c;
  CHECK(total == ucb.total_pulls());
  CHECK(ucb.total_pulls() == 502);
}

TEST_CASE("the bandit converges on a clearly better arm") {
  // best arm pays 0.9, the other five pay 0.3
  Rng rng(17);
  const size_t best = 4;
  UcbSelector ucb(6);
  int best_picks_late = 0;
  for (int t = 0; t < 1000; ++t) {
    size_t arm = ucb.select();
    if (t >= 900 && arm == best) ++best_picks_late;
    double p = arm == best ? 0.9 : 0.3;
    ucb.update(arm, rng.bernoulli(p) ? 1.0 : 0.0);
  }
  CHECK(best_picks_late >= 80);  // >= 0.8 frequency over pulls 900..1000
  CHECK(ucb.counts()[best] > 600);
}
