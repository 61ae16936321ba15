#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slicesim/pipe_transport.hpp"
#include "slicesim/report.hpp"
#include "slicesim/scenario.hpp"
#include "slicesim/sim.hpp"

namespace fs = std::filesystem;
using namespace slicesim;

namespace {

int run_scenario(const std::string& path, int64_t seed_override, std::string out_dir,
                 const std::string& format, bool quiet) {
  Scenario sc = load_scenario_file(path);
  if (seed_override >= 0) sc.seed = static_cast<uint64_t>(seed_override);

  if (out_dir.empty()) {
    const char* env = std::getenv("SLICESIM_OUT_DIR");
    fs::path base = env && *env ? fs::path(env) : fs::path("out");
    out_dir = (base / (sc.name + "-seed" + std::to_string(sc.seed))).string();
  }
  fs::create_directories(out_dir);

  std::unique_ptr<PipeTransport> transport;
  if (sc.control.mode == ControlMode::separated) {
    // let optimizer_cmd reach this binary via ${SLICESIM_BIN} regardless of cwd
    std::error_code ec;
    fs::path self = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) setenv("SLICESIM_BIN", self.c_str(), 0);
    transport = std::make_unique<PipeTransport>(sc.control.optimizer_cmd);
  }

  Simulation sim(sc, transport.get());
  RunResult result = sim.run();
  if (transport) transport->shutdown();

  export_records(result.records, out_dir, format);
  write_summary_json(result.summary, out_dir + "/summary.json");

  if (!quiet) {
    const RunSummary& s = result.summary;
    std::printf("scenario %s seed %llu: %lld/%lld completed (%.1f%%), %lld failed\n",
                s.scenario_name.c_str(), static_cast<unsigned long long>(s.seed),
                static_cast<long long>(s.sessions_completed),
                static_cast<long long>(s.requests_created), 100.0 * s.completion_rate,
                static_cast<long long>(s.sessions_failed));
    std::printf("latency: mean %.1f ms, p95 %.1f ms\n", s.mean_latency_us / 1000.0,
                s.p95_latency_us / 1000.0);
    std::printf("shares: uplink %.3f inference %.3f downlink %.3f\n", s.mean_uplink_share,
                s.mean_inference_share, s.mean_downlink_share);
    std::printf("efficiency: larei %.4f lseq %.4f, gpu %.1f%%\n", s.larei_mean, s.lseq_mean,
                100.0 * s.gpu_utilization);
    if (s.control_mode == "separated")
      std::printf("separated control: %d accepted, %d rejected, %d fallback events\n",
                  s.accepted_updates, s.rejected_updates, s.fallback_events);
    if (s.control_mode == "timed")
      std::printf("timed control: %d config switches\n", s.config_switches);
    if (s.control_mode == "ucb" && !s.ucb_pulls.empty()) {
      std::printf("ucb pulls:");
      for (size_t a = 0; a < s.ucb_pulls.size(); ++a)
        std::printf(" arm%zu=%lld", a, static_cast<long long>(s.ucb_pulls[a]));
      std::printf("\n");
    }
    std::printf("exports: %s\n", out_dir.c_str());
  }
  return 0;
}

int validate_scenario(const std::string& path) {
  Scenario sc = load_scenario_file(path);
  size_t fruits = 0;
  for (const auto& b : sc.tree.branches) fruits += b.fruits.size();
  std::printf("ok: %s (%zu branches, %zu fruits, %d ues, %zu models, %lld slots, control %s)\n",
              sc.name.c_str(), sc.tree.branches.size(), fruits, sc.total_ue_count(),
              sc.models.size(), static_cast<long long>(sc.duration_slots),
              to_string(sc.control.mode));
  return 0;
}

int optimizer_stdio(double start, double decay, double floor_ratio,
                    const std::string& misbehave) {
  std::map<std::string, double> max_ratio;
  std::string line;
  while (std::getline(std::cin, line)) {
    auto snap = parse_snapshot(line);
    if (!snap) continue;
    if (misbehave == "silent") continue;
    if (misbehave == "garbage") {
      std::cout << "this is not an update" << std::endl;
      continue;
    }
    RatioUpdate up;
    up.epoch = misbehave == "stale" ? snap->epoch - 1 : snap->epoch;
    for (const auto& [slice, st] : snap->slices) {
      auto it = max_ratio.find(slice);
      double v = it == max_ratio.end() ? start : it->second;
      up.ratios[slice] = {0.0, v};
      max_ratio[slice] = std::max(floor_ratio, v * decay);
    }
    std::cout << encode_update(up) << std::endl;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slot-level simulator for LLM service delivery over a sliced RAN"};
  app.set_version_flag("--version", "slicesim 0.1.0");
  app.require_subcommand(1);

  std::string scenario_path, out_dir, format = "csv";
  int64_t seed_override = -1;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "run a scenario and export metrics");
  run->add_option("scenario", scenario_path, "scenario json file")->required();
  run->add_option("--seed", seed_override, "override the scenario seed");
  run->add_option("--out", out_dir, "output directory (default out/<name>-seed<seed>)");
  run->add_option("--format", format, "export format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_flag("--quiet", quiet, "suppress the run summary on stdout");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("scenario", validate_path, "scenario json file")->required();

  CLI::App* report = app.add_subcommand("report", "summarize exported metrics");
  report->require_subcommand(1);
  std::string ue_export, ran_export, summary_path;
  std::vector<std::string> sweep_paths;
  CLI::App* rb = report->add_subcommand("bottleneck", "latency shares from ue_metrics");
  rb->add_option("export", ue_export, "ue_metrics.{csv,jsonl} or the run directory")->required();
  CLI::App* rp =
      report->add_subcommand("prb-timeline", "PRBs per slice over time from ran_metrics");
  rp->add_option("export", ran_export, "ran_metrics.{csv,jsonl} or the run directory")
      ->required();
  CLI::App* ru = report->add_subcommand("ucb-curve", "arm pulls and best-arm rate per episode");
  ru->add_option("summary", summary_path, "summary.json")->required();
  CLI::App* rs = report->add_subcommand("slice-sweep", "compare several summary.json files");
  rs->add_option("summaries", sweep_paths, "summary.json files")->required()->expected(-1);

  double opt_start = 0.9, opt_decay = 0.9, opt_floor = 0.3;
  std::string misbehave = "none";
  CLI::App* opt = app.add_subcommand(
      "optimizer-stdio", "reference separated-mode peer on stdin/stdout");
  opt->add_option("--start", opt_start, "initial per-slice max ratio")
      ->check(CLI::Range(0.01, 1.0));
  opt->add_option("--decay", opt_decay, "per-epoch decay factor")->check(CLI::Range(0.1, 1.0));
  opt->add_option("--floor", opt_floor, "lowest proposed max ratio")
      ->check(CLI::Range(0.01, 1.0));
  opt->add_option("--misbehave", misbehave, "fault injection mode")
      ->check(CLI::IsMember({"none", "silent", "garbage", "stale"}));

  // exit codes: 0 success, 1 scenario/usage error, 2 runtime error
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return run_scenario(scenario_path, seed_override, out_dir, format, quiet);
    if (validate->parsed()) return validate_scenario(validate_path);
    if (report->parsed()) {
      if (rb->parsed()) std::cout << report_bottleneck(ue_export);
      if (rp->parsed()) std::cout << report_prb_timeline(ran_export);
      if (ru->parsed()) std::cout << report_ucb_curve(summary_path);
      if (rs->parsed()) std::cout << report_slice_sweep(sweep_paths);
      return 0;
    }
    if (opt->parsed()) return optimizer_stdio(opt_start, opt_decay, opt_floor, misbehave);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
