#pragma once

#include "slicesim/domain.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

// Abstract link model: SNR evolves per-slot (AR(1) for mobile UEs, jitter
// around the mean for stationary ones), CQI/MCS/TBS/BLER derive from it.

int cqi_from_snr(double snr_db);
int mcs_from_cqi(int cqi, int margin = 2);

// transport block size for one grant
int64_t tbs_bytes(int mcs, int n_prbs);

// error probability, clamped to [0.001, 0.5]
double bler_probability(int mcs, double snr_db);

// true = transport block lost
bool bler_outcome(int mcs, double snr_db, Rng& rng);

void step_channel(ChannelState& state, const ChannelModel& model, Rng& rng);

}  // namespace slicesim
