#include "slicesim/domain.hpp"

#include <set>
#include <sstream>

namespace slicesim {

const char* to_string(ServiceClass c) {
  switch (c) {
    case ServiceClass::eMBB: return "eMBB";
    case ServiceClass::URLLC: return "URLLC";
    case ServiceClass::mMTC: return "mMTC";
  }
  return "?";
}

const char* to_string(Direction d) {
  return d == Direction::uplink ? "uplink" : "downlink";
}

const char* to_string(RequestMode m) {
  return m == RequestMode::image_request ? "image_request" : "text_request";
}

const char* to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::pending: return "pending";
    case SessionStatus::uplink: return "uplink";
    case SessionStatus::queued: return "queued";
    case SessionStatus::inferring: return "inferring";
    case SessionStatus::downlink: return "downlink";
    case SessionStatus::complete: return "complete";
    case SessionStatus::failed: return "failed";
  }
  return "?";
}

BranchSlice* SliceTree::find_branch(const std::string& id) {
  for (auto& b : branches)
    if (b.id == id) return &b;
  return nullptr;
}

const BranchSlice* SliceTree::find_branch(const std::string& id) const {
  return const_cast<SliceTree*>(this)->find_branch(id);
}

FruitSlice* SliceTree::find_fruit(const std::string& id) {
  for (auto& b : branches)
    for (auto& f : b.fruits)
      if (f.id == id) return &f;
  return nullptr;
}

const FruitSlice* SliceTree::find_fruit(const std::string& id) const {
  return const_cast<SliceTree*>(this)->find_fruit(id);
}

const BranchSlice* SliceTree::default_branch() const {
  for (const auto& b : branches)
    if (b.service_class == ServiceClass::eMBB) return &b;
  return branches.empty() ? nullptr : &branches.front();
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.path << ": " << v.message << "\n";
  return os.str();
}

namespace {

bool ratio_in_unit(double r) { return r >= 0.0 && r <= 1.0; }

void check_ratios(ValidationReport& rep, const std::string& path, double min_ratio,
                  double max_ratio) {
  if (!ratio_in_unit(min_ratio))
    rep.violations.push_back({path + ".min_ratio", "ratio outside [0, 1]"});
  if (!ratio_in_unit(max_ratio))
    rep.violations.push_back({path + ".max_ratio", "ratio outside [0, 1]"});
  if (min_ratio > max_ratio)
    rep.violations.push_back({path, "min_ratio exceeds max_ratio"});
}

}  // namespace

ValidationReport validate_slice_tree(const SliceTree& tree) {
  ValidationReport rep;
  if (tree.total_prbs <= 0)
    rep.violations.push_back({"total_prbs", "PRB pool must be positive"});

  std::set<std::string> branch_ids;
  std::set<std::string> fruit_ids;
  double branch_min_sum = 0.0;

  for (size_t i = 0; i < tree.branches.size(); ++i) {
    const auto& b = tree.branches[i];
    std::string bpath = "branches[" + std::to_string(i) + "]";
    if (b.id.empty()) rep.violations.push_back({bpath + ".id", "empty id"});
    if (!branch_ids.insert(b.id).second)
      rep.violations.push_back({bpath + ".id", "duplicate branch id '" + b.id + "'"});
    if (b.nssai.sst < 0 || b.nssai.sst > 255)
      rep.violations.push_back({bpath + ".nssai.sst", "sst outside [0, 255]"});
    if (b.nssai.sd < 0 || b.nssai.sd > 16'777'215)
      rep.violations.push_back({bpath + ".nssai.sd", "sd outside [0, 16777215]"});
    if (b.priority < 0)
      rep.violations.push_back({bpath + ".priority", "negative priority"});
    check_ratios(rep, bpath, b.min_ratio, b.max_ratio);
    branch_min_sum += b.min_ratio;

    double fruit_min_sum = 0.0;
    for (size_t j = 0; j < b.fruits.size(); ++j) {
      const auto& f = b.fruits[j];
      std::string fpath = bpath + ".fruits[" + std::to_string(j) + "]";
      if (f.id.empty()) rep.violations.push_back({fpath + ".id", "empty id"});
      if (!fruit_ids.insert(f.id).second)
        rep.violations.push_back({fpath + ".id", "duplicate fruit id '" + f.id + "'"});
      if (!f.parent_branch.empty() && f.parent_branch != b.id)
        rep.violations.push_back(
            {fpath + ".parent_branch", "does not name the containing branch '" + b.id + "'"});
      if (f.numeric_id < 0 || f.numeric_id > 255)
        rep.violations.push_back({fpath + ".numeric_id", "wire id outside [0, 255]"});
      check_ratios(rep, fpath, f.min_ratio, f.max_ratio);
      fruit_min_sum += f.min_ratio;
    }
    if (fruit_min_sum > 1.0 + 1e-12)
      rep.violations.push_back({bpath + ".fruits", "fruit min_ratio sum exceeds 1"});
  }
  if (branch_min_sum > 1.0 + 1e-12)
    rep.violations.push_back({"branches", "branch min_ratio sum exceeds 1"});
  return rep;
}

void advance_clock(SlotClock& clock) {
  ++clock.slot;
  if (clock.slot >= clock.slots_per_frame) {
    clock.slot = 0;
    clock.frame = (clock.frame + 1) & 1023;
  }
  ++clock.completed_slots;
  clock.sim_time_us += clock.slot_duration_us;
}

}  // namespace slicesim
