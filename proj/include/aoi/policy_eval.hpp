#pragma once

#include <cstdint>
#include <vector>

#include "aoi/mdp.hpp"
#include "aoi/policy.hpp"
#include "aoi/sim.hpp"

namespace aoi {

struct EvalResult {
  double avg_aoi = 0.0;   // J
  double avg_cost = 0.0;  // C
  Truncation trunc;
  std::vector<double> stationary;  // row-major over the truncated states

  double prob(State s) const { return stationary[state_index(trunc, s)]; }
  /// Expected slots between visits to (1,0).
  double mean_cycle_length() const { return 1.0 / prob(kRenewalState); }
};

/// Long-run averages of a policy from the stationary law of the truncated
/// chain, restricted to the recurrent class through (1,0). Mixtures are
/// combined by renewal-reward over their components' cycles.
///
/// Throws NoStationaryError when (1,0) is not recurrent, i.e. the chain can
/// drift into a region it never leaves.
EvalResult evaluate_exact(const Policy& policy, const ChannelModel& model, const Truncation& trunc);

/// Independent replications of sim::run started at (1,0).
RunStats evaluate_simulated(const Policy& policy, const ChannelModel& model, long long horizon,
                            int replications, std::uint64_t seed, unsigned workers = 0);

}  // namespace aoi
