#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "slicesim/compute.hpp"
#include "slicesim/control.hpp"
#include "slicesim/domain.hpp"
#include "slicesim/scheduler.hpp"

namespace slicesim {

// Raised for unreadable files, JSON syntax errors (message carries
// origin:line:column) and semantic errors (message carries a /json/pointer
// style path).
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ControlMode { none, timed, embedded, separated, ucb };
const char* to_string(ControlMode m);

struct UcbSettings {
  std::vector<SliceConfig> arms;  // candidate slice configurations
  int64_t episode_slots = 2'000;
  int64_t target_latency_us = 2'000'000;
};

struct ControlSettings {
  ControlMode mode = ControlMode::none;
  int64_t epoch_slots = 100;  // stats window for embedded/separated modes
  std::vector<double> ladder = {0.3, 0.6, 0.9};
  double high_water = 0.75;
  double low_water = 0.25;
  SliceConfigSchedule schedule;
  std::string optimizer_cmd;  // separated mode peer, run via /bin/sh -c
  int timeout_epochs = 2;
  UcbSettings ucb;
};

struct MetricsSettings {
  bool jitter = true;
  int64_t ran_heartbeat_slots = 200;  // idle-UE RAN record cadence
};

struct UeGroupSpec {
  int count = 1;
  std::string branch_id;  // empty = resolve via fruit parent / default branch
  std::string fruit_id;   // empty = branch-direct
  ChannelModel channel;
  UeProfile profile;
};

struct Scenario {
  int schema_version = 1;
  std::string name;
  std::string description;
  uint64_t seed = 1;
  int64_t duration_slots = 0;
  int slots_per_frame = 20;
  int64_t slot_duration_us = 500;
  MacConfig mac;
  ServerConfig server;
  std::vector<ModelProfile> models;
  std::string default_model;  // used by branch-direct UEs
  SliceTree tree;
  std::vector<UeGroupSpec> ue_groups;
  ControlSettings control;
  MetricsSettings metrics;

  int total_ue_count() const;
};

Scenario parse_scenario_json(const std::string& text, const std::string& origin);
Scenario load_scenario_file(const std::string& path);

}  // namespace slicesim
