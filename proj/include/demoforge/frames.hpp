#pragma once

#include <span>
#include <vector>

#include "demoforge/model.hpp"
#include "demoforge/rounds.hpp"

namespace demoforge {

// A player appears in a round with no state to sample from.
struct ParseError : Error {
    using Error::Error;
};

// Frame tick stride for the given rates (at least 1 tick).
Tick frame_stride(int tick_rate, int parse_rate);

// Downsamples one round's event stream into Frames at parse_rate. Frames sit
// at start_tick + k*stride while <= end_tick. Each frame carries the latest
// state per player (falling back to their first in-round update), the live
// fire/smoke areas, bomb state, phase, and the phase clock. `roster` fixes
// team membership for the round; player states are grouped accordingly.
std::vector<Frame> sample_frames(const RawRound& round, const ServerVars& vars,
                                 const ParserParams& params, int tick_rate,
                                 std::span<const PlayerInfo> roster);

// One trajectory per player: (tick, pos) from every frame where the player is
// alive. Requires frames to be sampled already.
std::vector<Trajectory> extract_trajectories(const GameRound& round);

// Seconds a phase nominally lasts under the given vars.
double phase_duration_secs(Phase phase, const ServerVars& vars);

}  // namespace demoforge
