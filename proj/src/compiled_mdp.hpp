#pragma once

// Flat successor tables for the truncated MDP (internal).

#include <array>
#include <cstdint>
#include <vector>

#include "aoi/mdp.hpp"

namespace aoi::detail {

struct Row {
  bool admissible = false;
  std::uint8_t count = 0;
  std::array<std::uint32_t, 2> next{};
  std::array<double, 2> prob{};
};

struct CompiledMdp {
  explicit CompiledMdp(const Mdp& mdp) : states(mdp.states()), rows(states.size()) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (Action a : kAllActions) {
        if (!mdp.admissible(states[i], a)) continue;
        Row& row = rows[i][index_of(a)];
        row.admissible = true;
        for (const auto& e : mdp.successors(states[i], a)) {
          row.next[row.count] = static_cast<std::uint32_t>(mdp.index(e.next));
          row.prob[row.count] = e.prob;
          ++row.count;
        }
      }
    }
  }

  std::vector<State> states;
  std::vector<std::array<Row, kNumActions>> rows;
};

}  // namespace aoi::detail
