#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "slicesim/domain.hpp"

using namespace slicesim;

namespace {

SliceTree paper_tree() {
  SliceTree tree;
  tree.total_prbs = 51;
  BranchSlice b;
  b.id = "embb";
  b.min_ratio = 0.2;
  b.max_ratio = 1.0;
  double maxes[3] = {0.3, 0.6, 0.9};
  for (int i = 0; i < 3; ++i) {
    FruitSlice f;
    f.id = "fruit" + std::to_string(i);
    f.numeric_id = i;
    f.parent_branch = "embb";
    f.min_ratio = 0.0;
    f.max_ratio = maxes[i];
    f.llm_model = "m";
    b.fruits.push_back(f);
  }
  tree.branches.push_back(b);
  return tree;
}

}  // namespace

TEST_CASE("slice tree with branch 0.2/1.0 and fruit maxes 0.3/0.6/0.9 is valid") {
  ValidationReport rep = validate_slice_tree(paper_tree());
  CHECK(rep.ok());
  CHECK(rep.violations.empty());
}

TEST_CASE("branch min ratios summing past 1 are rejected") {
  SliceTree tree;
  tree.total_prbs = 51;
  for (int i = 0; i < 2; ++i) {
    BranchSlice b;
    b.id = "b" + std::to_string(i);
    b.min_ratio = 0.7;
    tree.branches.push_back(b);
  }
  ValidationReport rep = validate_slice_tree(tree);
  REQUIRE_FALSE(rep.ok());
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.message.find("sum") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("fruit with min above max is reported at the fruit's path") {
  SliceTree tree = paper_tree();
  tree.branches[0].fruits[1].min_ratio = 0.5;
  tree.branches[0].fruits[1].max_ratio = 0.3;
  ValidationReport rep = validate_slice_tree(tree);
  REQUIRE_FALSE(rep.ok());
  bool at_fruit = false;
  for (const auto& v : rep.violations)
    if (v.path.find("fruits[1]") != std::string::npos &&
        v.message.find("exceeds") != std::string::npos)
      at_fruit = true;
  CHECK(at_fruit);
}

TEST_CASE("tree lookups resolve ids and the default branch prefers eMBB") {
  SliceTree tree = paper_tree();
  BranchSlice mmtc;
  mmtc.id = "sensor";
  mmtc.service_class = ServiceClass::mMTC;
  tree.branches.insert(tree.branches.begin(), mmtc);

  CHECK(tree.find_branch("embb") != nullptr);
  CHECK(tree.find_branch("nope") == nullptr);
  CHECK(tree.find_fruit("fruit2") != nullptr);
  CHECK(tree.find_fruit("fruit2")->parent_branch == "embb");
  CHECK(tree.find_fruit("nope") == nullptr);
  REQUIRE(tree.default_branch() != nullptr);
  CHECK(tree.default_branch()->id == "embb");
}

TEST_CASE("slot clock wraps the slot and the frame") {
  SlotClock clock;
  clock.frame = 0;
  clock.slot = 19;
  clock.slots_per_frame = 20;
  advance_clock(clock);
  CHECK(clock.frame == 1);
  CHECK(clock.slot == 0);

  clock.frame = 1023;
  clock.slot = 19;
  advance_clock(clock);
  CHECK(clock.frame == 0);
  CHECK(clock.slot == 0);
}

TEST_CASE("slot clock advances sim time by one slot duration") {
  SlotClock clock;
  clock.frame = 5;
  clock.slot = 3;
  clock.slot_duration_us = 500;
  clock.sim_time_us = 53'500;
  int64_t completed = clock.completed_slots;
  advance_clock(clock);
  CHECK(clock.sim_time_us == 54'000);
  CHECK(clock.completed_slots == completed + 1);
  CHECK(clock.slot == 4);
  CHECK(clock.frame == 5);
}

TEST_CASE("a long clock walk keeps (frame, slot) consistent with completed slots") {
  SlotClock clock;
  clock.slots_per_frame = 20;
  for (int i = 0; i < 1024 * 20 + 7; ++i) advance_clock(clock);
  CHECK(clock.completed_slots == 1024 * 20 + 7);
  CHECK(clock.frame == 0);
  CHECK(clock.slot == 7);
  CHECK(clock.sim_time_us == clock.completed_slots * clock.slot_duration_us);
}

TEST_CASE("enum names match the exported vocabulary") {
  CHECK(std::string(to_string(RequestMode::image_request)) == "image_request");
  CHECK(std::string(to_string(RequestMode::text_request)) == "text_request");
  CHECK(std::string(to_string(Direction::uplink)) == "uplink");
  CHECK(std::string(to_string(Direction::downlink)) == "downlink");
  CHECK(std::string(to_string(SessionStatus::complete)) == "complete");
  CHECK(std::string(to_string(ServiceClass::eMBB)) == "eMBB");
}
