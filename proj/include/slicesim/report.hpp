#pragma once

#include <string>
#include <vector>

#include "slicesim/sim.hpp"

namespace slicesim {

void write_summary_json(const RunSummary& summary, const std::string& path);

// tolerant reader: fields a report does not need may be absent
RunSummary read_summary_json(const std::string& path);

// latency-share tables rebuilt from an exported ue_metrics.{csv,jsonl};
// accepts the export file or the run directory containing it
std::string report_bottleneck(const std::string& path);

// plot-ready series of PRBs per slice over time (1 s buckets) plus per-UE
// totals; accepts the ran_metrics export or the run directory (UE-to-slice
// names come from the sibling summary.json when present)
std::string report_prb_timeline(const std::string& path);

// arm table plus a plot-ready series: per-episode cumulative pulls per arm
// and the cumulative best-arm selection rate
std::string report_ucb_curve(const std::string& summary_path);

// one line per run: completion and latency shares, from several summary.json
std::string report_slice_sweep(const std::vector<std::string>& summary_paths);

}  // namespace slicesim
