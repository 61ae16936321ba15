#include "slicesim/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace slicesim {

using ordered_json = nlohmann::ordered_json;

void write_summary_json(const RunSummary& s, const std::string& path) {
  ordered_json j;
  j["scenario"] = s.scenario_name;
  j["control_mode"] = s.control_mode;
  j["seed"] = s.seed;
  j["duration_slots"] = s.duration_slots;
  j["sim_time_us"] = s.sim_time_us;
  j["total_ues"] = s.total_ues;
  j["requests_created"] = s.requests_created;
  j["sessions_completed"] = s.sessions_completed;
  j["sessions_failed"] = s.sessions_failed;
  j["overload_failures"] = s.overload_failures;
  j["completion_rate"] = s.completion_rate;
  j["mean_latency_us"] = s.mean_latency_us;
  j["p95_latency_us"] = s.p95_latency_us;
  j["shares"] = {{"uplink", s.mean_uplink_share},
                 {"inference", s.mean_inference_share},
                 {"downlink", s.mean_downlink_share}};
  j["larei_mean"] = s.larei_mean;
  j["lseq_mean"] = s.lseq_mean;
  ordered_json slices = ordered_json::object();
  for (const auto& [slice, count] : s.completed_by_slice) {
    ordered_json e;
    e["completed"] = count;
    e["larei"] = s.larei_by_slice.count(slice) ? s.larei_by_slice.at(slice) : 0.0;
    e["lseq"] = s.lseq_by_slice.count(slice) ? s.lseq_by_slice.at(slice) : 0.0;
    e["mean_latency_us"] =
        s.mean_latency_us_by_slice.count(slice) ? s.mean_latency_us_by_slice.at(slice) : 0.0;
    slices[slice] = std::move(e);
  }
  j["slices"] = std::move(slices);
  j["prbs"] = {{"ul_granted", s.ul_granted_prbs},
               {"dl_granted", s.dl_granted_prbs},
               {"ul_unused", s.ul_unused_prbs},
               {"dl_unused", s.dl_unused_prbs}};
  j["harq_retransmissions"] = s.harq_retransmissions;
  j["gpu_utilization"] = s.gpu_utilization;
  ordered_json control;
  control["fallback_events"] = s.fallback_events;
  control["rejected_updates"] = s.rejected_updates;
  control["accepted_updates"] = s.accepted_updates;
  control["config_switches"] = s.config_switches;
  if (!s.ucb_pulls.empty()) {
    ordered_json ucb;
    ucb["pulls"] = s.ucb_pulls;
    ucb["means"] = s.ucb_means;
    ordered_json eps = ordered_json::array();
    for (const UcbEpisode& e : s.ucb_episodes)
      eps.push_back({{"arm", e.arm}, {"reward", e.reward}, {"completions", e.completions}});
    ucb["episodes"] = std::move(eps);
    control["ucb"] = std::move(ucb);
  }
  j["control"] = std::move(control);
  ordered_json ue_slice = ordered_json::object();
  for (const auto& [ue, slice] : s.ue_slice) ue_slice[std::to_string(ue)] = slice;
  j["ue_slice"] = std::move(ue_slice);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out.flush()) throw std::runtime_error("write failed for " + path);
}

RunSummary read_summary_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  ordered_json j = ordered_json::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw std::runtime_error("malformed summary json: " + path);

  RunSummary s;
  auto str = [&](const char* k, std::string& dst) {
    if (j.contains(k) && j[k].is_string()) dst = j[k].get<std::string>();
  };
  auto num = [&](const char* k, auto& dst) {
    if (j.contains(k) && j[k].is_number()) dst = j[k].get<std::decay_t<decltype(dst)>>();
  };
  str("scenario", s.scenario_name);
  str("control_mode", s.control_mode);
  num("seed", s.seed);
  num("duration_slots", s.duration_slots);
  num("sim_time_us", s.sim_time_us);
  num("total_ues", s.total_ues);
  num("requests_created", s.requests_created);
  num("sessions_completed", s.sessions_completed);
  num("sessions_failed", s.sessions_failed);
  num("overload_failures", s.overload_failures);
  num("completion_rate", s.completion_rate);
  num("mean_latency_us", s.mean_latency_us);
  num("p95_latency_us", s.p95_latency_us);
  num("larei_mean", s.larei_mean);
  num("lseq_mean", s.lseq_mean);
  num("harq_retransmissions", s.harq_retransmissions);
  num("gpu_utilization", s.gpu_utilization);
  if (j.contains("shares") && j["shares"].is_object()) {
    const ordered_json& sh = j["shares"];
    if (sh.contains("uplink")) s.mean_uplink_share = sh["uplink"].get<double>();
    if (sh.contains("inference")) s.mean_inference_share = sh["inference"].get<double>();
    if (sh.contains("downlink")) s.mean_downlink_share = sh["downlink"].get<double>();
  }
  if (j.contains("slices") && j["slices"].is_object()) {
    for (auto it = j["slices"].begin(); it != j["slices"].end(); ++it) {
      const ordered_json& e = it.value();
      if (e.contains("completed")) s.completed_by_slice[it.key()] = e["completed"].get<int64_t>();
      if (e.contains("larei")) s.larei_by_slice[it.key()] = e["larei"].get<double>();
      if (e.contains("lseq")) s.lseq_by_slice[it.key()] = e["lseq"].get<double>();
      if (e.contains("mean_latency_us"))
        s.mean_latency_us_by_slice[it.key()] = e["mean_latency_us"].get<double>();
    }
  }
  if (j.contains("prbs") && j["prbs"].is_object()) {
    const ordered_json& p = j["prbs"];
    if (p.contains("ul_granted")) s.ul_granted_prbs = p["ul_granted"].get<int64_t>();
    if (p.contains("dl_granted")) s.dl_granted_prbs = p["dl_granted"].get<int64_t>();
    if (p.contains("ul_unused")) s.ul_unused_prbs = p["ul_unused"].get<int64_t>();
    if (p.contains("dl_unused")) s.dl_unused_prbs = p["dl_unused"].get<int64_t>();
  }
  if (j.contains("control") && j["control"].is_object()) {
    const ordered_json& c = j["control"];
    if (c.contains("fallback_events")) s.fallback_events = c["fallback_events"].get<int>();
    if (c.contains("rejected_updates")) s.rejected_updates = c["rejected_updates"].get<int>();
    if (c.contains("accepted_updates")) s.accepted_updates = c["accepted_updates"].get<int>();
    if (c.contains("config_switches")) s.config_switches = c["config_switches"].get<int>();
    if (c.contains("ucb") && c["ucb"].is_object()) {
      const ordered_json& u = c["ucb"];
      if (u.contains("pulls")) s.ucb_pulls = u["pulls"].get<std::vector<int64_t>>();
      if (u.contains("means")) s.ucb_means = u["means"].get<std::vector<double>>();
      if (u.contains("episodes") && u["episodes"].is_array()) {
        for (const ordered_json& e : u["episodes"]) {
          UcbEpisode ep;
          if (e.contains("arm")) ep.arm = e["arm"].get<size_t>();
          if (e.contains("reward")) ep.reward = e["reward"].get<double>();
          if (e.contains("completions")) ep.completions = e["completions"].get<int64_t>();
          s.ucb_episodes.push_back(ep);
        }
      }
    }
  }
  if (j.contains("ue_slice") && j["ue_slice"].is_object()) {
    for (auto it = j["ue_slice"].begin(); it != j["ue_slice"].end(); ++it)
      s.ue_slice[std::stoi(it.key())] = it.value().get<std::string>();
  }
  return s;
}

namespace {

const std::string& field(const std::map<std::string, std::string>& row, const std::string& col,
                         const std::string& path) {
  auto it = row.find(col);
  if (it == row.end()) throw std::runtime_error(path + ": missing column " + col);
  return it->second;
}

double num_field(const std::map<std::string, std::string>& row, const std::string& col,
                 const std::string& path) {
  const std::string& v = field(row, col, path);
  if (v.empty()) return 0.0;
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": column " + col + " is not numeric: " + v);
  }
}

// a report argument may name the export file itself or the run directory
std::string resolve_export(const std::string& path, const std::string& base) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (fs::is_directory(p)) {
    for (const char* ext : {".csv", ".jsonl"}) {
      fs::path cand = p / (base + ext);
      if (fs::exists(cand)) return cand.string();
    }
    throw std::runtime_error(path + ": no " + base + ".csv or " + base + ".jsonl inside");
  }
  return path;
}

}  // namespace

std::string report_bottleneck(const std::string& path) {
  std::string ue_export_path = resolve_export(path, "ue_metrics");
  auto rows = read_table(ue_export_path);
  std::vector<Session> storage;
  storage.reserve(rows.size());
  for (const auto& row : rows) {
    Session s;
    int64_t total = std::llround(num_field(row, "total_comm_time", ue_export_path) * 1000.0);
    int64_t ul = std::llround(num_field(row, "uplink_time", ue_export_path) * 1000.0);
    int64_t dl = std::llround(num_field(row, "downlink_time", ue_export_path) * 1000.0);
    int64_t queue =
        row.count("queue_time") ? std::llround(num_field(row, "queue_time", ue_export_path) * 1000.0)
                                : 0;
    s.request_created_us = 0;
    s.uplink_done_us = ul;
    s.inference_start_us = std::min(ul + queue, std::max(ul, total - dl));
    s.inference_done_us = std::max(ul, total - dl);
    s.downlink_done_us = total;
    s.status = SessionStatus::complete;
    const std::string& mode = field(row, "request_mode", ue_export_path);
    s.mode = mode == "image_request" ? RequestMode::image_request : RequestMode::text_request;
    const std::string& res = field(row, "tx_image_resolution", ue_export_path);
    size_t x = res.find('x');
    if (!res.empty() && x != std::string::npos) {
      s.tx_width = std::stoi(res.substr(0, x));
      s.tx_height = std::stoi(res.substr(x + 1));
    }
    storage.push_back(s);
  }
  std::vector<const Session*> sessions;
  sessions.reserve(storage.size());
  for (const Session& s : storage) sessions.push_back(&s);

  std::ostringstream os;
  os << "latency shares by image resolution (" << sessions.size() << " requests)\n";
  os << bottleneck_report(sessions, GroupBy::resolution).to_string();
  os << "\nlatency shares by request mode\n";
  os << bottleneck_report(sessions, GroupBy::direction).to_string();
  return os.str();
}

std::string report_prb_timeline(const std::string& path) {
  namespace fs = std::filesystem;
  std::string ran_export_path = resolve_export(path, "ran_metrics");

  std::map<int, std::string> ue_slice;
  std::string scenario;
  fs::path summary = fs::path(ran_export_path).parent_path() / "summary.json";
  if (fs::exists(summary)) {
    RunSummary s = read_summary_json(summary.string());
    ue_slice = s.ue_slice;
    scenario = s.scenario_name;
  }
  auto slice_of = [&ue_slice](int64_t ue) {
    auto it = ue_slice.find(static_cast<int>(ue));
    if (it != ue_slice.end() && !it->second.empty()) return it->second;
    return "ue" + std::to_string(ue);
  };

  auto rows = read_table(ran_export_path);
  std::set<std::string> slices;
  std::map<int64_t, std::map<std::string, int64_t>> buckets;  // second -> slice -> prbs
  struct Agg {
    int64_t records = 0;
    int64_t ul_rbs = 0, dl_rbs = 0;
    int64_t ul_bytes = 0, dl_bytes = 0;
  };
  std::map<int64_t, Agg> by_ue;
  for (const auto& row : rows) {
    int64_t ue = std::llround(num_field(row, "ue_id", ran_export_path));
    int64_t ul_rbs = std::llround(num_field(row, "ul_sch_rbs", ran_export_path));
    int64_t dl_rbs = std::llround(num_field(row, "dl_sch_rbs", ran_export_path));
    Agg& a = by_ue[ue];
    ++a.records;
    a.ul_rbs += ul_rbs;
    a.dl_rbs += dl_rbs;
    a.ul_bytes += std::llround(num_field(row, "ul_sch_bytes", ran_export_path));
    a.dl_bytes += std::llround(num_field(row, "dl_sch_bytes", ran_export_path));
    double t_ms = num_field(row, "gnb_timestamp", ran_export_path);
    int64_t second = std::max<int64_t>(0, static_cast<int64_t>(std::floor(t_ms / 1000.0)));
    std::string slice = slice_of(ue);
    slices.insert(slice);
    buckets[second][slice] += ul_rbs + dl_rbs;
  }

  std::ostringstream os;
  os << "prb timeline" << (scenario.empty() ? "" : " for " + scenario) << " (1 s buckets, "
     << "slice attribution uses the end-of-run ue mapping)\n";
  os << "time_s";
  for (const std::string& s : slices) os << ',' << s;
  os << '\n';
  if (!buckets.empty()) {
    int64_t first = buckets.begin()->first, last = buckets.rbegin()->first;
    for (int64_t t = first; t <= last; ++t) {
      os << t;
      auto bit = buckets.find(t);
      for (const std::string& s : slices) {
        int64_t v = 0;
        if (bit != buckets.end()) {
          auto sit = bit->second.find(s);
          if (sit != bit->second.end()) v = sit->second;
        }
        os << ',' << v;
      }
      os << '\n';
    }
  }

  os << "\nper-ue totals\n";
  os << "ue_id,slice,records,ul_rbs,dl_rbs,ul_sch_bytes,dl_sch_bytes\n";
  for (const auto& [ue, a] : by_ue)
    os << ue << ',' << slice_of(ue) << ',' << a.records << ',' << a.ul_rbs << ',' << a.dl_rbs
       << ',' << a.ul_bytes << ',' << a.dl_bytes << '\n';
  return os.str();
}

std::string report_ucb_curve(const std::string& summary_path) {
  RunSummary s = read_summary_json(summary_path);
  std::ostringstream os;
  os << "ucb arms for " << s.scenario_name << " (seed " << s.seed << ")\n";
  os << "arm,pulls,mean_reward\n";
  size_t n_arms = s.ucb_pulls.size();
  for (size_t a = 0; a < n_arms; ++a) {
    double mean = a < s.ucb_means.size() ? s.ucb_means[a] : 0.0;
    os << a << ',' << s.ucb_pulls[a] << ',' << format_double(mean) << '\n';
  }

  size_t best = 0;
  for (size_t a = 1; a < s.ucb_means.size(); ++a)
    if (s.ucb_means[a] > s.ucb_means[best]) best = a;

  os << "\nepisode series (best arm " << best << ")\n";
  os << "episode";
  for (size_t a = 0; a < n_arms; ++a) os << ",arm" << a << "_pulls";
  os << ",best_arm_rate\n";
  std::vector<int64_t> cum(n_arms, 0);
  int64_t best_count = 0;
  for (size_t i = 0; i < s.ucb_episodes.size(); ++i) {
    size_t arm = s.ucb_episodes[i].arm;
    if (arm < n_arms) ++cum[arm];
    if (arm == best) ++best_count;
    os << (i + 1);
    for (size_t a = 0; a < n_arms; ++a) os << ',' << cum[a];
    os << ',' << format_double(static_cast<double>(best_count) / static_cast<double>(i + 1))
       << '\n';
  }
  return os.str();
}

std::string report_slice_sweep(const std::vector<std::string>& summary_paths) {
  std::ostringstream os;
  os << "scenario,seed,completed,mean_latency_ms,uplink_share,inference_share,"
        "downlink_share\n";
  for (const std::string& path : summary_paths) {
    RunSummary s = read_summary_json(path);
    os << s.scenario_name << ',' << s.seed << ',' << s.sessions_completed << ','
       << format_double(s.mean_latency_us / 1000.0) << ',' << format_double(s.mean_uplink_share)
       << ',' << format_double(s.mean_inference_share) << ','
       << format_double(s.mean_downlink_share) << '\n';
  }
  return os.str();
}

}  // namespace slicesim
