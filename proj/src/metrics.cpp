#include "slicesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace slicesim {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (v == 0) v = 0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string cell_to_string(const Cell& c) {
  switch (c.index()) {
    case 0: return "";
    case 1: return std::to_string(std::get<int64_t>(c));
    case 2: return format_double(std::get<double>(c));
    default: return std::get<std::string>(c);
  }
}

const std::vector<std::string>& UeRecord::columns() {
  static const std::vector<std::string> cols = {
      "timestamp",        "wireless_comm_time", "total_comm_time",
      "tx_image_resolution", "rx_image_resolution", "expected_word_count",
      "actual_word_count", "llm_model",         "request_mode",
      "upload_periodicity", "uplink_time",      "downlink_time",
      "downlink_text_size", "uplink_bytes",     "downlink_bytes",
      "queue_time",
  };
  return cols;
}

std::vector<Cell> UeRecord::cells() const {
  return {
      Cell{timestamp_ms},
      Cell{wireless_comm_time_ms},
      Cell{total_comm_time_ms},
      tx_image_resolution.empty() ? Cell{} : Cell{tx_image_resolution},
      rx_image_resolution.empty() ? Cell{} : Cell{rx_image_resolution},
      Cell{int64_t{expected_word_count}},
      Cell{int64_t{actual_word_count}},
      Cell{llm_model},
      Cell{request_mode},
      Cell{upload_periodicity_ms},
      Cell{uplink_time_ms},
      Cell{downlink_time_ms},
      Cell{downlink_text_size},
      Cell{uplink_bytes},
      Cell{downlink_bytes},
      Cell{queue_time_ms},
  };
}

const std::vector<std::string>& RanRecord::columns() {
  static const std::vector<std::string> cols = {
      "gnb_timestamp", "frame_number", "slot_number", "imsi", "rnti",
      "ue_id", "ue_number", "dl_throughput", "ul_throughput", "ph_db",
      "pcmax_dbm", "avg_rsrp", "cqi", "ri", "dl_mcs", "ul_mcs",
      "scheduled_ul_bytes", "estimated_ul_buffer", "dl_pdus_total",
      "dl_bler", "ul_bler", "dl_sch_bytes", "dl_sch_rbs", "ul_sch_bytes",
      "ul_sch_rbs", "ul_mac_sdus", "primary_slice_max", "primary_slice_min",
      "secondary_slice_max", "secondary_slice_min",
  };
  return cols;
}

std::vector<Cell> RanRecord::cells() const {
  return {
      Cell{gnb_timestamp_ms},
      Cell{int64_t{frame_number}},
      Cell{int64_t{slot_number}},
      Cell{imsi},
      Cell{int64_t{rnti}},
      Cell{int64_t{ue_id}},
      Cell{int64_t{ue_number}},
      Cell{dl_throughput_mbps},
      Cell{ul_throughput_mbps},
      Cell{ph_db},
      Cell{pcmax_dbm},
      Cell{avg_rsrp_dbm},
      Cell{int64_t{cqi}},
      Cell{int64_t{ri}},
      Cell{int64_t{dl_mcs}},
      Cell{int64_t{ul_mcs}},
      Cell{scheduled_ul_bytes},
      Cell{estimated_ul_buffer},
      Cell{dl_pdus_total},
      Cell{dl_bler_pct},
      Cell{ul_bler_pct},
      Cell{dl_sch_bytes},
      Cell{int64_t{dl_sch_rbs}},
      Cell{ul_sch_bytes},
      Cell{int64_t{ul_sch_rbs}},
      Cell{int64_t{ul_mac_sdus}},
      Cell{primary_slice_max_pct},
      Cell{primary_slice_min_pct},
      has_secondary ? Cell{secondary_slice_max_pct} : Cell{},
      has_secondary ? Cell{secondary_slice_min_pct} : Cell{},
  };
}

const std::vector<std::string>& ServerRecord::columns() {
  static const std::vector<std::string> cols = {
      "timestamp", "llm_inference_time", "server_processing_time",
      "input_tokens", "output_tokens", "cold_start_time", "warm_start_time",
      "bleu_score", "rouge_score", "semantic_score", "gpu_utilization",
      "vram_usage", "downlink_image", "response_text",
  };
  return cols;
}

std::vector<Cell> ServerRecord::cells() const {
  return {
      Cell{timestamp_ms},
      Cell{llm_inference_time_ms},
      Cell{server_processing_time_ms},
      Cell{int64_t{input_tokens}},
      Cell{int64_t{output_tokens}},
      Cell{cold_start_time_ms},
      Cell{warm_start_time_ms},
      Cell{},  // bleu_score
      Cell{},  // rouge_score
      Cell{},  // semantic_score
      Cell{gpu_utilization_pct},
      Cell{vram_usage_mb},
      Cell{},  // downlink_image
      Cell{},  // response_text
  };
}

int64_t observed_timestamp_us(int64_t true_us, Rng& jitter_rng, bool enabled) {
  if (!enabled) return true_us;
  return true_us + jitter_rng.uniform_int(-1000, 1000);
}

LatencyBreakdown latency_breakdown(const Session& s) {
  if (s.request_created_us < 0 || s.uplink_done_us < 0 || s.inference_start_us < 0 ||
      s.inference_done_us < 0 || s.downlink_done_us < 0) {
    throw std::invalid_argument("latency_breakdown: session not complete");
  }
  LatencyBreakdown b;
  b.uplink_us = s.uplink_done_us - s.request_created_us;
  b.queue_us = s.inference_start_us - s.uplink_done_us;
  b.inference_us = s.inference_done_us - s.inference_start_us;
  b.downlink_us = s.downlink_done_us - s.inference_done_us;
  b.total_us = s.downlink_done_us - s.request_created_us;
  if (b.uplink_us < 0 || b.queue_us < 0 || b.inference_us < 0 || b.downlink_us < 0)
    throw std::invalid_argument("latency_breakdown: timestamps not monotone");
  if (b.total_us <= 0) throw std::domain_error("latency_breakdown: zero total latency");
  double t = static_cast<double>(b.total_us);
  b.uplink_share = static_cast<double>(b.uplink_us) / t;
  b.inference_share = static_cast<double>(b.queue_us + b.inference_us) / t;
  b.downlink_share = static_cast<double>(b.downlink_us) / t;
  return b;
}

double larei(double rdv_bytes, double para_b, double resources_bytes, double latency_s,
             double omega) {
  if (resources_bytes <= 0) throw std::domain_error("larei: nonpositive resources");
  if (latency_s <= 0) throw std::domain_error("larei: nonpositive latency");
  if (para_b < 0) throw std::domain_error("larei: negative parameter count");
  return rdv_bytes * std::log1p(para_b) / (resources_bytes * latency_s) * omega;
}

double lseq(double rdv_bytes, double error_rate, double para_b, double resources_bytes,
            double delta) {
  if (resources_bytes <= 0) throw std::domain_error("lseq: nonpositive resources");
  if (para_b < 0) throw std::domain_error("lseq: negative parameter count");
  return rdv_bytes * (1.0 - error_rate) * std::sqrt(para_b) / resources_bytes * delta;
}

namespace {

struct ShareSample {
  double ul, inf, dl, total_us;
};

struct Accum {
  std::vector<ShareSample> samples;
};

void finish_group(GroupStats& g, const Accum& a) {
  size_t n = a.samples.size();
  g.count = n;
  if (n == 0) return;
  double su = 0, si = 0, sd = 0, st = 0;
  for (const auto& s : a.samples) {
    su += s.ul;
    si += s.inf;
    sd += s.dl;
    st += s.total_us;
  }
  double dn = static_cast<double>(n);
  g.mean_uplink_share = su / dn;
  g.mean_inference_share = si / dn;
  g.mean_downlink_share = sd / dn;
  g.mean_total_us = st / dn;
  if (n >= 2) {
    double vu = 0, vi = 0, vd = 0;
    for (const auto& s : a.samples) {
      vu += (s.ul - g.mean_uplink_share) * (s.ul - g.mean_uplink_share);
      vi += (s.inf - g.mean_inference_share) * (s.inf - g.mean_inference_share);
      vd += (s.dl - g.mean_downlink_share) * (s.dl - g.mean_downlink_share);
    }
    double denom = dn * (dn - 1.0);
    g.se_uplink_share = std::sqrt(vu / denom);
    g.se_inference_share = std::sqrt(vi / denom);
    g.se_downlink_share = std::sqrt(vd / denom);
  }
}

}  // namespace

BottleneckReport bottleneck_report(const std::vector<const Session*>& sessions, GroupBy by) {
  BottleneckReport rep;
  std::vector<const Session*> done;
  size_t skipped = 0;
  for (const Session* s : sessions) {
    if (s && s->status == SessionStatus::complete)
      done.push_back(s);
    else
      ++skipped;
  }
  if (skipped > 0)
    rep.warnings.push_back(std::to_string(skipped) + " non-completed sessions skipped");

  std::vector<std::string> order;
  std::map<std::string, Accum> groups;
  auto add = [&](const std::string& label, const Session* s) {
    LatencyBreakdown b = latency_breakdown(*s);
    auto it = groups.find(label);
    if (it == groups.end()) {
      order.push_back(label);
      it = groups.emplace(label, Accum{}).first;
    }
    it->second.samples.push_back(
        {b.uplink_share, b.inference_share, b.downlink_share,
         static_cast<double>(b.total_us)});
  };

  if (by == GroupBy::resolution) {
    std::vector<const Session*> image;
    size_t text = 0;
    for (const Session* s : done) {
      if (s->mode == RequestMode::image_request && s->tx_width > 0 && s->tx_height > 0)
        image.push_back(s);
      else
        ++text;
    }
    if (text > 0)
      rep.warnings.push_back(std::to_string(text) +
                             " sessions without an image payload omitted from "
                             "resolution grouping");
    if (!image.empty()) {
      std::vector<int64_t> px;
      px.reserve(image.size());
      for (const Session* s : image)
        px.push_back(static_cast<int64_t>(s->tx_width) * s->tx_height);
      std::sort(px.begin(), px.end());
      size_t n = px.size();
      int64_t bound[6];
      for (int k = 1; k <= 6; ++k) {
        size_t idx = (n * static_cast<size_t>(k) + 5) / 6;  // ceil(n*k/6)
        bound[k - 1] = px[idx - 1];
      }
      for (int k = 0; k < 6; ++k) order.push_back("R" + std::to_string(k + 1));
      for (int k = 0; k < 6; ++k) groups.emplace(order[static_cast<size_t>(k)], Accum{});
      for (const Session* s : image) {
        int64_t p = static_cast<int64_t>(s->tx_width) * s->tx_height;
        int bucket = 5;
        for (int k = 0; k < 6; ++k) {
          if (p <= bound[k]) {
            bucket = k;
            break;
          }
        }
        add("R" + std::to_string(bucket + 1), s);
      }
    }
  } else if (by == GroupBy::slice_config) {
    bool any_cfg = std::any_of(done.begin(), done.end(),
                               [](const Session* s) { return s->config_index >= 0; });
    for (const Session* s : done) {
      std::string label = any_cfg ? "config" + std::to_string(std::max(s->config_index, 0))
                                  : (s->slice_id.empty() ? "(default)" : s->slice_id);
      add(label, s);
    }
  } else {
    for (const Session* s : done) add(to_string(s->mode), s);
  }

  for (const std::string& label : order) {
    const Accum& a = groups.at(label);
    if (a.samples.empty()) {
      rep.warnings.push_back("empty group " + label + " omitted");
      continue;
    }
    GroupStats g;
    g.label = label;
    finish_group(g, a);
    rep.groups.push_back(std::move(g));
  }
  return rep;
}

std::string BottleneckReport::to_string() const {
  std::ostringstream os;
  os << "group,count,uplink_share,uplink_se,inference_share,inference_se,"
        "downlink_share,downlink_se,mean_total_ms\n";
  for (const auto& g : groups) {
    os << g.label << ',' << g.count << ',' << format_double(g.mean_uplink_share) << ','
       << format_double(g.se_uplink_share) << ',' << format_double(g.mean_inference_share)
       << ',' << format_double(g.se_inference_share) << ','
       << format_double(g.mean_downlink_share) << ',' << format_double(g.se_downlink_share)
       << ',' << format_double(g.mean_total_us / 1000.0) << '\n';
  }
  for (const auto& w : warnings) os << "# warning: " << w << '\n';
  return os.str();
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

void append_json_cell(ordered_json& obj, const std::string& key, const Cell& c) {
  switch (c.index()) {
    case 0: obj[key] = nullptr; break;
    case 1: obj[key] = std::get<int64_t>(c); break;
    case 2: obj[key] = std::get<double>(c); break;
    default: obj[key] = std::get<std::string>(c); break;
  }
}

template <typename Rec>
void write_table(const std::vector<Rec>& rows, const std::string& path,
                 const std::string& format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const auto& cols = Rec::columns();
  if (format == "csv") {
    for (size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      out << cols[i];
    }
    out << '\n';
    for (const Rec& r : rows) {
      auto cells = r.cells();
      for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(cell_to_string(cells[i]));
      }
      out << '\n';
    }
  } else {
    for (const Rec& r : rows) {
      ordered_json obj;
      auto cells = r.cells();
      for (size_t i = 0; i < cols.size(); ++i) append_json_cell(obj, cols[i], cells[i]);
      out << obj.dump() << '\n';
    }
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

ExportCounts export_records(const Records& records, const std::string& dir,
                            const std::string& format) {
  if (format != "csv" && format != "jsonl")
    throw std::invalid_argument("unknown export format: " + format);
  std::string ext = "." + format;
  write_table(records.ue, dir + "/ue_metrics" + ext, format);
  write_table(records.ran, dir + "/ran_metrics" + ext, format);
  write_table(records.server, dir + "/server_metrics" + ext, format);
  return {records.ue.size(), records.ran.size(), records.server.size()};
}

namespace {

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string json_cell_text(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<int64_t>());
  return v.dump();
}

}  // namespace

std::vector<std::map<std::string, std::string>> read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::map<std::string, std::string>> rows;
  std::string line;
  bool jsonl = path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0;
  if (jsonl) {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ordered_json obj = ordered_json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object())
        throw std::runtime_error("malformed jsonl row in " + path);
      std::map<std::string, std::string> row;
      for (auto it = obj.begin(); it != obj.end(); ++it)
        row[it.key()] = json_cell_text(it.value());
      rows.push_back(std::move(row));
    }
    return rows;
  }
  if (!std::getline(in, line)) return rows;
  std::vector<std::string> header = parse_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = parse_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("csv row width mismatch in " + path);
    std::map<std::string, std::string> row;
    for (size_t i = 0; i < header.size(); ++i) row[header[i]] = fields[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace slicesim
