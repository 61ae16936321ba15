#include "slicesim/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace slicesim {

using ordered_json = nlohmann::ordered_json;

const char* to_string(ControlMode m) {
  switch (m) {
    case ControlMode::none: return "none";
    case ControlMode::timed: return "timed";
    case ControlMode::embedded: return "embedded";
    case ControlMode::separated: return "separated";
    case ControlMode::ucb: return "ucb";
  }
  return "?";
}

int Scenario::total_ue_count() const {
  int n = 0;
  for (const auto& g : ue_groups) n += g.count;
  return n;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioError(path + ": " + msg);
}

std::string format_range(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// strict object view: every key must be consumed, leftovers are errors
class Obj {
 public:
  Obj(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  const ordered_json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const ordered_json& require(const char* key) {
    const ordered_json* v = find(key);
    if (!v) fail(sub(key), "missing required field");
    return *v;
  }

  std::string sub(const std::string& key) const { return path_ + "/" + key; }
  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(path_ + "/" + it.key(), "unknown field");
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

int64_t as_int(const ordered_json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int64_t>();
}

double as_double(const ordered_json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::string as_string(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const ordered_json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

int64_t int_field(Obj& o, const char* key, int64_t def, int64_t lo, int64_t hi) {
  const ordered_json* v = o.find(key);
  if (!v) return def;
  int64_t x = as_int(*v, o.sub(key));
  if (x < lo || x > hi)
    fail(o.sub(key), "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  return x;
}

double double_field(Obj& o, const char* key, double def, double lo, double hi) {
  const ordered_json* v = o.find(key);
  if (!v) return def;
  double x = as_double(*v, o.sub(key));
  if (!(x >= lo && x <= hi))
    fail(o.sub(key), "value " + format_range(x) + " outside [" + format_range(lo) + ", " +
                         format_range(hi) + "]");
  return x;
}

Mobility parse_mobility(const ordered_json& v, const std::string& path) {
  std::string s = as_string(v, path);
  if (s == "stationary") return Mobility::stationary;
  if (s == "mobile") return Mobility::mobile;
  fail(path, "expected \"stationary\" or \"mobile\", got \"" + s + "\"");
}

ServiceClass parse_service_class(const ordered_json& v, const std::string& path) {
  std::string s = as_string(v, path);
  if (s == "embb") return ServiceClass::eMBB;
  if (s == "urllc") return ServiceClass::URLLC;
  if (s == "mmtc") return ServiceClass::mMTC;
  fail(path, "expected \"embb\", \"urllc\" or \"mmtc\", got \"" + s + "\"");
}

ChannelModel parse_channel(const ordered_json& j, const std::string& path) {
  Obj o(j, path);
  ChannelModel m;
  m.snr_mean_db = double_field(o, "snr_mean_db", m.snr_mean_db, -20.0, 60.0);
  m.snr_std_db = double_field(o, "snr_std_db", m.snr_std_db, 0.0, 30.0);
  m.ar_coefficient = double_field(o, "ar_coefficient", m.ar_coefficient, 0.0, 0.999);
  if (const ordered_json* v = o.find("mobility")) m.mobility = parse_mobility(*v, o.sub("mobility"));
  o.finish();
  return m;
}

UeProfile parse_profile(const ordered_json& j, const std::string& path, Mobility mobility) {
  Obj o(j, path);
  UeProfile p;
  p.mobility = mobility;
  p.request_period_us =
      int_field(o, "request_period_us", p.request_period_us, 1, 3'600'000'000LL);
  p.mode_mix = double_field(o, "mode_mix", p.mode_mix, 0.0, 1.0);
  p.compression_ratio = double_field(o, "compression_ratio", p.compression_ratio, 1.0, 1000.0);
  if (const ordered_json* v = o.find("base_resolutions")) {
    const std::string vp = o.sub("base_resolutions");
    if (!v->is_array() || v->empty()) fail(vp, "expected a non-empty array");
    p.base_resolutions.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      const ordered_json& e = (*v)[i];
      std::string ep = vp + "/" + std::to_string(i);
      if (!e.is_array() || e.size() != 2) fail(ep, "expected [width, height]");
      int64_t w = as_int(e[0], ep + "/0"), h = as_int(e[1], ep + "/1");
      if (w < 16 || w > 7680 || h < 16 || h > 4320) fail(ep, "resolution outside 16..7680 x 16..4320");
      p.base_resolutions.emplace_back(static_cast<int>(w), static_cast<int>(h));
    }
  }
  if (const ordered_json* v = o.find("resolution_coeffs")) {
    const std::string vp = o.sub("resolution_coeffs");
    if (!v->is_array() || v->empty()) fail(vp, "expected a non-empty array");
    p.resolution_coeffs.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      double c = as_double((*v)[i], vp + "/" + std::to_string(i));
      if (!(c > 0.0 && c <= 1.0)) fail(vp + "/" + std::to_string(i), "coefficient outside (0, 1]");
      p.resolution_coeffs.push_back(c);
    }
  }
  if (const ordered_json* v = o.find("word_counts")) {
    const std::string vp = o.sub("word_counts");
    if (!v->is_array() || v->empty()) fail(vp, "expected a non-empty array");
    p.word_counts.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      int64_t w = as_int((*v)[i], vp + "/" + std::to_string(i));
      if (w < 1 || w > 100000) fail(vp + "/" + std::to_string(i), "word count outside 1..100000");
      p.word_counts.push_back(static_cast<int>(w));
    }
  }
  o.finish();
  return p;
}

ModelProfile parse_model(const ordered_json& j, const std::string& path) {
  Obj o(j, path);
  ModelProfile m;
  m.name = as_string(o.require("name"), o.sub("name"));
  if (m.name.empty()) fail(o.sub("name"), "model name must be non-empty");
  m.param_count_b = double_field(o, "param_count_b", m.param_count_b, 0.001, 10000.0);
  m.warm_base_us = int_field(o, "warm_base_us", m.warm_base_us, 0, 3'600'000'000LL);
  m.cold_extra_us = int_field(o, "cold_extra_us", m.cold_extra_us, 0, 3'600'000'000LL);
  m.alpha_us_per_input_token =
      double_field(o, "alpha_us_per_input_token", m.alpha_us_per_input_token, 0.0, 1e9);
  m.beta_us_per_output_token =
      double_field(o, "beta_us_per_output_token", m.beta_us_per_output_token, 0.0, 1e9);
  m.tokens_per_word = double_field(o, "tokens_per_word", m.tokens_per_word, 0.1, 100.0);
  m.bytes_per_token = double_field(o, "bytes_per_token", m.bytes_per_token, 0.1, 1000.0);
  o.finish();
  return m;
}

FruitSlice parse_fruit(const ordered_json& j, const std::string& path,
                       const std::string& parent) {
  Obj o(j, path);
  FruitSlice f;
  f.id = as_string(o.require("id"), o.sub("id"));
  f.parent_branch = parent;
  f.numeric_id = static_cast<int>(int_field(o, "numeric_id", 0, 0, 255));
  f.min_ratio = double_field(o, "min_ratio", 0.0, 0.0, 1.0);
  f.max_ratio = double_field(o, "max_ratio", 1.0, 0.0, 1.0);
  f.llm_model = as_string(o.require("llm_model"), o.sub("llm_model"));
  f.price_tier = static_cast<int>(int_field(o, "price_tier", 0, 0, 1000000));
  o.finish();
  return f;
}

BranchSlice parse_branch(const ordered_json& j, const std::string& path) {
  Obj o(j, path);
  BranchSlice b;
  b.id = as_string(o.require("id"), o.sub("id"));
  if (const ordered_json* v = o.find("service_class"))
    b.service_class = parse_service_class(*v, o.sub("service_class"));
  if (const ordered_json* v = o.find("nssai")) {
    Obj n(*v, o.sub("nssai"));
    b.nssai.sst = static_cast<int>(int_field(n, "sst", 1, 0, 255));
    b.nssai.sd = static_cast<int>(int_field(n, "sd", 0, 0, 16777215));
    n.finish();
  }
  b.min_ratio = double_field(o, "min_ratio", 0.0, 0.0, 1.0);
  b.max_ratio = double_field(o, "max_ratio", 1.0, 0.0, 1.0);
  b.priority = static_cast<int>(int_field(o, "priority", 0, 0, 1000000));
  if (const ordered_json* v = o.find("fruits")) {
    const std::string vp = o.sub("fruits");
    if (!v->is_array()) fail(vp, "expected an array");
    for (size_t i = 0; i < v->size(); ++i)
      b.fruits.push_back(parse_fruit((*v)[i], vp + "/" + std::to_string(i), b.id));
  }
  o.finish();
  return b;
}

SliceConfig parse_slice_config(const ordered_json& j, const std::string& path, size_t index) {
  Obj o(j, path);
  SliceConfig c;
  c.label = "config" + std::to_string(index);
  if (const ordered_json* v = o.find("label")) c.label = as_string(*v, o.sub("label"));
  if (const ordered_json* v = o.find("fruit_ratios")) {
    const std::string vp = o.sub("fruit_ratios");
    if (!v->is_object()) fail(vp, "expected an object of fruit -> [min, max]");
    for (auto it = v->begin(); it != v->end(); ++it) {
      std::string ep = vp + "/" + it.key();
      const ordered_json& pair = it.value();
      if (!pair.is_array() || pair.size() != 2) fail(ep, "expected [min_ratio, max_ratio]");
      double mn = as_double(pair[0], ep + "/0"), mx = as_double(pair[1], ep + "/1");
      if (!(mn >= 0.0 && mn <= 1.0 && mx >= 0.0 && mx <= 1.0)) fail(ep, "ratios outside [0, 1]");
      if (mn > mx) fail(ep, "min_ratio exceeds max_ratio");
      c.fruit_ratios[it.key()] = {mn, mx};
    }
  }
  if (const ordered_json* v = o.find("ue_fruit")) {
    const std::string vp = o.sub("ue_fruit");
    if (!v->is_object()) fail(vp, "expected an object of ue_id -> fruit id");
    for (auto it = v->begin(); it != v->end(); ++it) {
      std::string ep = vp + "/" + it.key();
      int ue_id = 0;
      try {
        size_t pos = 0;
        ue_id = std::stoi(it.key(), &pos);
        if (pos != it.key().size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail(ep, "key must be a numeric ue_id");
      }
      c.ue_fruit[ue_id] = as_string(it.value(), ep);
    }
  }
  o.finish();
  return c;
}

ControlSettings parse_control(const ordered_json& j, const std::string& path) {
  Obj o(j, path);
  ControlSettings c;
  std::string mode = as_string(o.require("mode"), o.sub("mode"));
  if (mode == "none") c.mode = ControlMode::none;
  else if (mode == "timed") c.mode = ControlMode::timed;
  else if (mode == "embedded") c.mode = ControlMode::embedded;
  else if (mode == "separated") c.mode = ControlMode::separated;
  else if (mode == "ucb") c.mode = ControlMode::ucb;
  else fail(o.sub("mode"), "expected one of none/timed/embedded/separated/ucb, got \"" + mode + "\"");

  c.epoch_slots = int_field(o, "epoch_slots", c.epoch_slots, 1, 1'000'000);
  c.high_water = double_field(o, "high_water", c.high_water, 0.0, 1.0);
  c.low_water = double_field(o, "low_water", c.low_water, 0.0, 1.0);
  if (c.low_water >= c.high_water) fail(o.sub("low_water"), "low_water must be below high_water");
  if (const ordered_json* v = o.find("ladder")) {
    const std::string vp = o.sub("ladder");
    if (!v->is_array() || v->empty()) fail(vp, "expected a non-empty array of ratios");
    c.ladder.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      double r = as_double((*v)[i], vp + "/" + std::to_string(i));
      if (!(r > 0.0 && r <= 1.0)) fail(vp + "/" + std::to_string(i), "rung outside (0, 1]");
      if (!c.ladder.empty() && r <= c.ladder.back())
        fail(vp + "/" + std::to_string(i), "rungs must be strictly increasing");
      c.ladder.push_back(r);
    }
  }
  if (const ordered_json* v = o.find("optimizer_cmd"))
    c.optimizer_cmd = as_string(*v, o.sub("optimizer_cmd"));
  c.timeout_epochs = static_cast<int>(int_field(o, "timeout_epochs", c.timeout_epochs, 1, 1000));

  if (const ordered_json* v = o.find("schedule")) {
    Obj s(*v, o.sub("schedule"));
    c.schedule.dwell_us = int_field(s, "dwell_us", c.schedule.dwell_us, 1, 86'400'000'000LL);
    if (const ordered_json* cy = s.find("cyclic"))
      c.schedule.cyclic = as_bool(*cy, s.sub("cyclic"));
    const ordered_json& cfgs = s.require("configs");
    const std::string cp = s.sub("configs");
    if (!cfgs.is_array() || cfgs.empty()) fail(cp, "expected a non-empty array");
    for (size_t i = 0; i < cfgs.size(); ++i)
      c.schedule.configs.push_back(parse_slice_config(cfgs[i], cp + "/" + std::to_string(i), i));
    s.finish();
  }

  if (const ordered_json* v = o.find("ucb")) {
    Obj u(*v, o.sub("ucb"));
    const ordered_json& arms = u.require("arms");
    const std::string ap = u.sub("arms");
    if (!arms.is_array() || arms.empty())
      fail(ap, "expected a non-empty array of slice configs");
    for (size_t i = 0; i < arms.size(); ++i)
      c.ucb.arms.push_back(parse_slice_config(arms[i], ap + "/" + std::to_string(i), i));
    c.ucb.episode_slots = int_field(u, "episode_slots", c.ucb.episode_slots, 1, 10'000'000);
    c.ucb.target_latency_us =
        int_field(u, "target_latency_us", c.ucb.target_latency_us, 1, 3'600'000'000LL);
    u.finish();
  }

  if (c.mode == ControlMode::timed && c.schedule.configs.empty())
    fail(o.sub("schedule"), "timed mode requires a schedule");
  if (c.mode == ControlMode::separated && c.optimizer_cmd.empty())
    fail(o.sub("optimizer_cmd"), "separated mode requires an optimizer command");
  if (c.mode == ControlMode::ucb && c.ucb.arms.empty())
    fail(o.sub("ucb"), "ucb mode requires an arms list");
  o.finish();
  return c;
}

void cross_validate(const Scenario& sc) {
  ValidationReport rep = validate_slice_tree(sc.tree);
  if (!rep.ok()) {
    std::string msg = "/slices: invalid slice tree";
    for (const auto& v : rep.violations) msg += "\n  " + v.path + ": " + v.message;
    throw ScenarioError(msg);
  }

  std::set<std::string> model_names;
  for (const auto& m : sc.models)
    if (!model_names.insert(m.name).second)
      fail("/server/models", "duplicate model name \"" + m.name + "\"");
  if (!model_names.count(sc.default_model))
    fail("/server/default_model", "unknown model \"" + sc.default_model + "\"");
  for (size_t bi = 0; bi < sc.tree.branches.size(); ++bi) {
    const BranchSlice& b = sc.tree.branches[bi];
    for (size_t fi = 0; fi < b.fruits.size(); ++fi) {
      if (!model_names.count(b.fruits[fi].llm_model))
        fail("/slices/branches/" + std::to_string(bi) + "/fruits/" + std::to_string(fi) +
                 "/llm_model",
             "unknown model \"" + b.fruits[fi].llm_model + "\"");
    }
  }

  for (size_t gi = 0; gi < sc.ue_groups.size(); ++gi) {
    const UeGroupSpec& g = sc.ue_groups[gi];
    std::string gp = "/ues/" + std::to_string(gi);
    const BranchSlice* branch = nullptr;
    if (!g.branch_id.empty()) {
      branch = sc.tree.find_branch(g.branch_id);
      if (!branch) fail(gp + "/branch", "unknown branch \"" + g.branch_id + "\"");
    }
    if (!g.fruit_id.empty()) {
      const FruitSlice* fruit = sc.tree.find_fruit(g.fruit_id);
      if (!fruit) fail(gp + "/fruit", "unknown fruit \"" + g.fruit_id + "\"");
      if (branch && fruit->parent_branch != branch->id)
        fail(gp + "/fruit",
             "fruit \"" + g.fruit_id + "\" belongs to branch \"" + fruit->parent_branch + "\"");
    }
  }

  const ControlSettings& c = sc.control;
  auto check_config = [&sc](const SliceConfig& cfg, const std::string& cp) {
    for (const auto& [fruit, ratios] : cfg.fruit_ratios)
      if (!sc.tree.find_fruit(fruit))
        fail(cp + "/fruit_ratios/" + fruit, "unknown fruit \"" + fruit + "\"");
    int total_ues = sc.total_ue_count();
    for (const auto& [ue_id, fruit] : cfg.ue_fruit) {
      if (ue_id < 0 || ue_id >= total_ues)
        fail(cp + "/ue_fruit/" + std::to_string(ue_id),
             "ue_id outside 0.." + std::to_string(total_ues - 1));
      if (!fruit.empty() && !sc.tree.find_fruit(fruit))
        fail(cp + "/ue_fruit/" + std::to_string(ue_id), "unknown fruit \"" + fruit + "\"");
    }
    SliceTree patched = sc.tree;
    for (const auto& [fruit, ratios] : cfg.fruit_ratios) {
      FruitSlice* f = patched.find_fruit(fruit);
      f->min_ratio = ratios.first;
      f->max_ratio = ratios.second;
    }
    ValidationReport rep = validate_slice_tree(patched);
    if (!rep.ok()) fail(cp, "config leaves the slice tree invalid: " + rep.to_string());
  };
  for (size_t ci = 0; ci < c.schedule.configs.size(); ++ci)
    check_config(c.schedule.configs[ci], "/control/schedule/configs/" + std::to_string(ci));
  for (size_t ai = 0; ai < c.ucb.arms.size(); ++ai)
    check_config(c.ucb.arms[ai], "/control/ucb/arms/" + std::to_string(ai));
}

}  // namespace

Scenario parse_scenario_json(const std::string& text, const std::string& origin) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    size_t byte = e.byte > 0 ? e.byte : 1;
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ScenarioError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                        ": JSON syntax error: " + e.what());
  }

  Obj o(root, "");
  Scenario sc;
  int64_t version = as_int(o.require("schema_version"), "/schema_version");
  if (version != 1)
    fail("/schema_version", "unsupported version " + std::to_string(version) + " (expected 1)");
  sc.schema_version = 1;
  sc.name = as_string(o.require("name"), "/name");
  if (const ordered_json* v = o.find("description"))
    sc.description = as_string(*v, "/description");
  if (const ordered_json* v = o.find("seed")) {
    int64_t s = as_int(*v, "/seed");
    if (s < 0) fail("/seed", "seed must be non-negative");
    sc.seed = static_cast<uint64_t>(s);
  }
  sc.duration_slots = as_int(o.require("duration_slots"), "/duration_slots");
  if (sc.duration_slots < 0 || sc.duration_slots > 100'000'000)
    fail("/duration_slots", "expected 0..100000000 slots");

  {
    Obj cell(o.require("cell"), "/cell");
    sc.tree.total_prbs = static_cast<int>(int_field(cell, "total_prbs", 51, 1, 100000));
    sc.slots_per_frame = static_cast<int>(int_field(cell, "slots_per_frame", 20, 1, 160));
    sc.slot_duration_us = int_field(cell, "slot_duration_us", 500, 1, 1'000'000);
    cell.finish();
  }

  if (const ordered_json* v = o.find("mac")) {
    Obj mac(*v, "/mac");
    sc.mac.pf_window_slots =
        static_cast<int>(int_field(mac, "pf_window_slots", sc.mac.pf_window_slots, 1, 100'000'000));
    sc.mac.pf_floor_bps = double_field(mac, "pf_floor_bps", sc.mac.pf_floor_bps, 1e-9, 1e12);
    sc.mac.max_attempts = static_cast<int>(int_field(mac, "max_attempts", sc.mac.max_attempts, 1, 16));
    if (const ordered_json* b = mac.find("bler")) {
      std::string s = as_string(*b, "/mac/bler");
      if (s == "model") sc.mac.bler_mode = MacConfig::BlerMode::model;
      else if (s == "never") sc.mac.bler_mode = MacConfig::BlerMode::never_error;
      else if (s == "always") sc.mac.bler_mode = MacConfig::BlerMode::always_error;
      else fail("/mac/bler", "expected \"model\", \"never\" or \"always\", got \"" + s + "\"");
    }
    if (const ordered_json* b = mac.find("step_channels"))
      sc.mac.step_channels = as_bool(*b, "/mac/step_channels");
    mac.finish();
  }

  {
    Obj srv(o.require("server"), "/server");
    sc.server.n_gpus = static_cast<int>(int_field(srv, "n_gpus", sc.server.n_gpus, 1, 1024));
    sc.server.queue_depth =
        static_cast<int>(int_field(srv, "queue_depth", sc.server.queue_depth, 1, 1'000'000));
    sc.server.processing_overhead_us =
        int_field(srv, "processing_overhead_us", sc.server.processing_overhead_us, 0, 60'000'000);
    const ordered_json& models = srv.require("models");
    if (!models.is_array() || models.empty()) fail("/server/models", "expected a non-empty array");
    for (size_t i = 0; i < models.size(); ++i)
      sc.models.push_back(parse_model(models[i], "/server/models/" + std::to_string(i)));
    sc.default_model = sc.models.front().name;
    if (const ordered_json* v = srv.find("default_model"))
      sc.default_model = as_string(*v, "/server/default_model");
    srv.finish();
  }

  {
    Obj slices(o.require("slices"), "/slices");
    const ordered_json& branches = slices.require("branches");
    if (!branches.is_array() || branches.empty())
      fail("/slices/branches", "expected a non-empty array");
    for (size_t i = 0; i < branches.size(); ++i)
      sc.tree.branches.push_back(
          parse_branch(branches[i], "/slices/branches/" + std::to_string(i)));
    slices.finish();
  }

  {
    const ordered_json& ues = o.require("ues");
    if (!ues.is_array() || ues.empty()) fail("/ues", "expected a non-empty array");
    for (size_t i = 0; i < ues.size(); ++i) {
      std::string gp = "/ues/" + std::to_string(i);
      Obj g(ues[i], gp);
      UeGroupSpec spec;
      spec.count = static_cast<int>(int_field(g, "count", 1, 1, 100000));
      if (const ordered_json* v = g.find("branch")) spec.branch_id = as_string(*v, gp + "/branch");
      if (const ordered_json* v = g.find("fruit")) spec.fruit_id = as_string(*v, gp + "/fruit");
      if (const ordered_json* v = g.find("channel"))
        spec.channel = parse_channel(*v, gp + "/channel");
      if (const ordered_json* v = g.find("profile"))
        spec.profile = parse_profile(*v, gp + "/profile", spec.channel.mobility);
      else
        spec.profile.mobility = spec.channel.mobility;
      g.finish();
      sc.ue_groups.push_back(std::move(spec));
    }
  }

  if (const ordered_json* v = o.find("control")) sc.control = parse_control(*v, "/control");

  if (const ordered_json* v = o.find("metrics")) {
    Obj m(*v, "/metrics");
    if (const ordered_json* j = m.find("jitter")) sc.metrics.jitter = as_bool(*j, "/metrics/jitter");
    sc.metrics.ran_heartbeat_slots =
        int_field(m, "ran_heartbeat_slots", sc.metrics.ran_heartbeat_slots, 1, 100'000'000);
    m.finish();
  }

  o.finish();
  cross_validate(sc);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str(), path);
}

}  // namespace slicesim
