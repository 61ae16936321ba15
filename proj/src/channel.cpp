#include "slicesim/channel.hpp"

#include <algorithm>
#include <cmath>

namespace slicesim {

int cqi_from_snr(double snr_db) {
  int cqi = static_cast<int>(std::floor(snr_db / 2.0));
  return std::clamp(cqi, 0, 15);
}

int mcs_from_cqi(int cqi, int margin) {
  return std::clamp(2 * cqi - margin, 0, 28);
}

int64_t tbs_bytes(int mcs, int n_prbs) {
  double efficiency = 0.2 + 0.19 * mcs;  // bits per resource element
  return static_cast<int64_t>(std::floor(n_prbs * 168.0 * efficiency / 8.0));
}

double bler_probability(int mcs, double snr_db) {
  double x = (2.0 * mcs - snr_db - 4.0) / 3.0;
  double p = 1.0 / (1.0 + std::exp(-x));
  return std::clamp(p, 0.001, 0.5);
}

bool bler_outcome(int mcs, double snr_db, Rng& rng) {
  return rng.bernoulli(bler_probability(mcs, snr_db));
}

void step_channel(ChannelState& state, const ChannelModel& model, Rng& rng) {
  if (model.mobility == Mobility::mobile) {
    double ar = model.ar_coefficient;
    double innovation_std = model.snr_std_db * std::sqrt(std::max(0.0, 1.0 - ar * ar));
    state.snr_db = model.snr_mean_db + ar * (state.snr_db - model.snr_mean_db) +
                   rng.gaussian(0.0, innovation_std);
  } else {
    state.snr_db = model.snr_mean_db + rng.gaussian(0.0, model.snr_std_db / 10.0);
  }
  state.cqi = cqi_from_snr(state.snr_db);
  state.ul_mcs = mcs_from_cqi(state.cqi);
  state.dl_mcs = state.ul_mcs;
  state.ul_bler = bler_probability(state.ul_mcs, state.snr_db);
  state.dl_bler = bler_probability(state.dl_mcs, state.snr_db);
  state.rsrp_dbm = -110.0 + state.snr_db;
}

}  // namespace slicesim
