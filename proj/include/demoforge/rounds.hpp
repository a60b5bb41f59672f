#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "demoforge/model.hpp"

namespace demoforge {

// Raised by reconcile_match when no valid rounds remain.
struct EmptyMatch : Error {
    EmptyMatch() : Error("no valid rounds in match") {}
};

// Why a segmented round failed validation.
enum class ValidityReason {
    DurationOutOfBounds,
    NoWinCondition,
    InconsistentEliminations,
    BombReasonWithoutPlant,
    ScoreRegression,
};

std::string_view validity_reason_name(ValidityReason r);

struct ValidityVerdict {
    std::vector<ValidityReason> reasons;
    // Recorded winner disagrees with the winner implied by the recorded
    // reason. The recorded winner is trusted; the round stays valid.
    bool winner_conflict = false;

    bool valid() const { return reasons.empty(); }
};

// Live per-round state tracked while walking the event stream.
struct RoundMachineState {
    Phase current_phase = Phase::RoundEnd;  // pre-match limbo; RoundEnd->Freeze is legal
    int round_num = 0;
    Tick start_tick = 0;
    Tick phase_start_tick = 0;
    Tick freeze_end_tick = 0;
    bool bomb_planted = false;
    bool bomb_defused = false;
    Tick bomb_plant_tick = 0;
    int alive_ct = 5;
    int alive_t = 5;
    std::pair<int, int> scores{0, 0};  // (ct, t) running tally
    std::vector<GameEvent> pending_events;
};

// A segmented round plus its complete in-span event sequence, kept for the
// frame sampler (the GameRound itself stores only the category lists).
struct RawRound {
    GameRound round;
    std::vector<GameEvent> events;
};

struct SegmentResult {
    std::vector<RawRound> rounds;
    CleaningStats stats;  // orphan/incomplete/pre-match/phase counters only
};

// Splits the tick-sorted stream into RoundStart..RoundEnd spans after the
// last MatchStart. Orphan RoundEnds are dropped but still advance the
// recorded score tally, so later repairs surface in reconcile_match. The
// trailing partial round at EOF is dropped when drop_incomplete is set,
// otherwise kept with a synthesized end (it will fail validation).
SegmentResult segment_rounds(std::span<const GameEvent> events, const ServerVars& vars,
                             int tick_rate, bool drop_incomplete = true);

// Total function: classifies one segmented round against game logic.
// prev_scores is the recorded (ct, t) tally of the previous kept round, used
// for the ScoreRegression check; pass nullopt for the first round.
ValidityVerdict validate_round(const RawRound& r, const ServerVars& vars, int tick_rate,
                               std::optional<std::pair<int, int>> prev_scores,
                               std::span<const PlayerInfo> roster);

// First win condition met at `tick`, in priority order
// BombDefused > BombExploded > eliminations > TargetSaved.
std::optional<std::pair<Side, RoundEndReason>> check_win_condition(const RoundMachineState& state,
                                                                   Tick tick,
                                                                   const ServerVars& vars,
                                                                   int tick_rate);

// Renumbers rounds contiguously from 1, recomputes cumulative scores from the
// winner sequence (repair count on mismatch), and cuts the match at the
// clinch score (maxRegulationRounds/2)+1. Throws EmptyMatch on empty input.
void reconcile_match(std::vector<RawRound>& rounds, const ServerVars& vars, CleaningStats& stats);

// Side each roster player plays in the given 1-based round: the header side,
// flipped once the switch point has passed.
Side side_in_round(const PlayerInfo& player, int round_num, int side_switch_after);

}  // namespace demoforge
