#include "demoforge/rounds.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

namespace demoforge {

namespace {

// Latest side seen for each player id inside a round, falling back to the
// roster assignment (flipped past the switch point) when a player never
// appears in a PlayerUpdate.
std::array<std::optional<Side>, 256> side_map_for_round(const RawRound& r,
                                                        std::span<const PlayerInfo> roster,
                                                        int side_switch_after) {
    std::array<std::optional<Side>, 256> sides{};
    for (const PlayerInfo& p : roster)
        sides[p.id] = side_in_round(p, r.round.round_num, side_switch_after);
    for (const GameEvent& ev : r.events)
        if (const auto* up = std::get_if<PlayerUpdateEvent>(&ev.body))
            sides[up->state.player_id] = up->state.side;
    return sides;
}

// Sum of each side's equipment value once buying has settled: the last
// update per player at or before the freeze end (or the first in-round
// update for stragglers).
void start_equipment(RawRound& rr) {
    std::array<std::optional<std::pair<Side, int>>, 256> chosen{};
    std::array<bool, 256> frozen{};  // already saw an update <= freeze end
    for (const GameEvent& ev : rr.events) {
        const auto* up = std::get_if<PlayerUpdateEvent>(&ev.body);
        if (!up) continue;
        const PlayerState& s = up->state;
        if (ev.tick <= rr.round.freeze_end_tick) {
            chosen[s.player_id] = {s.side, s.eq_val};
            frozen[s.player_id] = true;
        } else if (!frozen[s.player_id] && !chosen[s.player_id].has_value()) {
            chosen[s.player_id] = {s.side, s.eq_val};
        }
    }
    int ct = 0, t = 0;
    for (const auto& c : chosen)
        if (c) (c->first == Side::CT ? ct : t) += c->second;
    rr.round.ct_start_eq_val = ct;
    rr.round.t_start_eq_val = t;
}

void finalize_round(RoundMachineState& st, const RoundEndEvent& end, Tick end_tick,
                    const ServerVars& vars, int tick_rate, std::vector<RawRound>& out) {
    RawRound rr;
    GameRound& r = rr.round;
    r.round_num = st.round_num;
    r.start_tick = st.start_tick;
    r.end_tick = end_tick;
    r.official_end_tick = end_tick + static_cast<Tick>(vars.round_end_secs) * tick_rate;
    if (st.freeze_end_tick <= st.start_tick)  // no Freeze->Default seen; assume nominal
        st.freeze_end_tick = st.start_tick + static_cast<Tick>(vars.freeze_time_secs) * tick_rate;
    r.freeze_end_tick = std::clamp(st.freeze_end_tick, st.start_tick + 1, end_tick);
    if (st.bomb_planted) r.bomb_plant_tick = st.bomb_plant_tick;
    r.winner = end.winner;
    r.reason = end.reason;
    r.ct_score = st.scores.first;
    r.t_score = st.scores.second;

    for (const GameEvent& ev : st.pending_events) {
        std::visit(
            [&](const auto& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, DamageEvent>) r.damages.push_back(ev);
                else if constexpr (std::is_same_v<T, KillEvent>) r.kills.push_back(ev);
                else if constexpr (std::is_same_v<T, FlashEvent>) r.flashes.push_back(ev);
                else if constexpr (std::is_same_v<T, BombPlantEvent> ||
                                   std::is_same_v<T, BombDefuseEvent> ||
                                   std::is_same_v<T, BombExplodeEvent>)
                    r.bomb_events.push_back(ev);
                else if constexpr (std::is_same_v<T, GrenadeThrowEvent>) r.grenades.push_back(ev);
                else if constexpr (std::is_same_v<T, WeaponFireEvent>) r.weapon_fires.push_back(ev);
            },
            ev.body);
    }
    rr.events = std::move(st.pending_events);
    start_equipment(rr);
    out.push_back(std::move(rr));
}

}  // namespace

std::string_view validity_reason_name(ValidityReason r) {
    switch (r) {
        case ValidityReason::DurationOutOfBounds: return "DurationOutOfBounds";
        case ValidityReason::NoWinCondition: return "NoWinCondition";
        case ValidityReason::InconsistentEliminations: return "InconsistentEliminations";
        case ValidityReason::BombReasonWithoutPlant: return "BombReasonWithoutPlant";
        case ValidityReason::ScoreRegression: return "ScoreRegression";
    }
    return "?";
}

Side side_in_round(const PlayerInfo& player, int round_num, int side_switch_after) {
    return round_num > side_switch_after ? opposite(player.start_side) : player.start_side;
}

SegmentResult segment_rounds(std::span<const GameEvent> events, const ServerVars& vars,
                             int tick_rate, bool drop_incomplete) {
    SegmentResult result;
    CleaningStats& stats = result.stats;

    // Everything before the last MatchStart is warmup/restart junk.
    std::size_t begin = 0;
    for (std::size_t i = 0; i < events.size(); ++i)
        if (event_is<MatchStartEvent>(events[i])) begin = i + 1;
    for (std::size_t i = 0; i + 1 < begin; ++i)
        if (event_is<RoundStartEvent>(events[i])) ++stats.discarded_pre_match;

    RoundMachineState st;
    bool in_round = false;
    std::pair<int, int> tally{0, 0};  // advances on every RoundEnd, orphans included

    for (std::size_t i = begin; i < events.size(); ++i) {
        const GameEvent& ev = events[i];

        if (const auto* rs = std::get_if<RoundStartEvent>(&ev.body)) {
            if (in_round) ++stats.dropped_incomplete;  // start without an end
            st = RoundMachineState{};
            st.current_phase = Phase::RoundEnd;
            st.round_num = rs->round_num;
            st.start_tick = ev.tick;
            st.phase_start_tick = ev.tick;
            st.scores = tally;
            st.pending_events.push_back(ev);
            in_round = true;
            continue;
        }
        if (const auto* re = std::get_if<RoundEndEvent>(&ev.body)) {
            (re->winner == Side::CT ? tally.first : tally.second) += 1;
            if (!in_round) {
                ++stats.orphan_round_ends;
                continue;
            }
            st.pending_events.push_back(ev);
            st.scores = tally;
            finalize_round(st, *re, ev.tick, vars, tick_rate, result.rounds);
            in_round = false;
            continue;
        }
        if (!in_round) continue;  // round-end phase filler or stray events

        if (const auto* pc = std::get_if<PhaseChangeEvent>(&ev.body)) {
            if (!legal_phase_transition(st.current_phase, pc->phase)) {
                ++stats.ignored_phase_changes;
                continue;
            }
            if (st.current_phase == Phase::Freeze && pc->phase == Phase::Default)
                st.freeze_end_tick = ev.tick;
            st.current_phase = pc->phase;
            st.phase_start_tick = ev.tick;
        } else if (const auto* bp = std::get_if<BombPlantEvent>(&ev.body)) {
            (void)bp;
            if (!st.bomb_planted) {
                st.bomb_planted = true;
                st.bomb_plant_tick = ev.tick;
            }
        }
        st.pending_events.push_back(ev);
    }

    if (in_round) {
        if (drop_incomplete) {
            ++stats.dropped_incomplete;
        } else {
            // Synthesize an end so the round survives to validation, where it
            // is flagged rather than silently completed.
            RoundEndEvent synthetic{Side::CT, RoundEndReason::TargetSaved};
            Tick last = st.pending_events.empty() ? st.start_tick : st.pending_events.back().tick;
            st.scores = tally;
            finalize_round(st, synthetic, last, vars, tick_rate, result.rounds);
        }
    }
    return result;
}

std::optional<std::pair<Side, RoundEndReason>> check_win_condition(const RoundMachineState& state,
                                                                   Tick tick,
                                                                   const ServerVars& vars,
                                                                   int tick_rate) {
    const bool bomb_live = state.bomb_planted && !state.bomb_defused;
    if (state.bomb_defused) return std::make_pair(Side::CT, RoundEndReason::BombDefused);
    if (bomb_live && tick >= state.bomb_plant_tick + static_cast<Tick>(vars.bomb_timer_secs) * tick_rate)
        return std::make_pair(Side::T, RoundEndReason::BombExploded);
    if (state.alive_ct == 0) return std::make_pair(Side::T, RoundEndReason::EliminationOfCT);
    if (state.alive_t == 0 && !bomb_live)
        return std::make_pair(Side::CT, RoundEndReason::EliminationOfT);
    if (!state.bomb_planted &&
        tick >= state.freeze_end_tick + static_cast<Tick>(vars.round_time_secs) * tick_rate)
        return std::make_pair(Side::CT, RoundEndReason::TargetSaved);
    return std::nullopt;
}

ValidityVerdict validate_round(const RawRound& rr, const ServerVars& vars, int tick_rate,
                               std::optional<std::pair<int, int>> prev_scores,
                               std::span<const PlayerInfo> roster) {
    ValidityVerdict verdict;
    const GameRound& r = rr.round;
    auto flag = [&](ValidityReason reason) {
        if (std::find(verdict.reasons.begin(), verdict.reasons.end(), reason) ==
            verdict.reasons.end())
            verdict.reasons.push_back(reason);
    };

    verdict.winner_conflict = winner_for_reason(r.reason) != r.winner;

    // Rebuild end-of-round machine state from the event record.
    const auto sides = side_map_for_round(rr, roster, vars.side_switch_after);
    std::array<bool, 256> dead{};
    int ct_deaths = 0, t_deaths = 0;
    bool defused = false;
    for (const GameEvent& ev : rr.events) {
        if (const auto* k = std::get_if<KillEvent>(&ev.body)) {
            if (dead[k->victim_id]) continue;
            dead[k->victim_id] = true;
            const auto side = sides[k->victim_id];
            if (side == Side::CT) ++ct_deaths;
            else if (side == Side::T) ++t_deaths;
        } else if (event_is<BombDefuseEvent>(ev)) {
            defused = true;
        }
    }

    RoundMachineState st;
    st.round_num = r.round_num;
    st.start_tick = r.start_tick;
    st.freeze_end_tick = r.freeze_end_tick;
    st.bomb_planted = r.bomb_plant_tick.has_value();
    st.bomb_plant_tick = r.bomb_plant_tick.value_or(0);
    st.bomb_defused = defused;
    st.alive_ct = 5 - std::min(ct_deaths, 5);
    st.alive_t = 5 - std::min(t_deaths, 5);

    const bool bomb_reason =
        r.reason == RoundEndReason::BombDefused || r.reason == RoundEndReason::BombExploded;
    if (bomb_reason && !r.bomb_plant_tick.has_value()) flag(ValidityReason::BombReasonWithoutPlant);
    if (r.reason == RoundEndReason::EliminationOfT && st.alive_t > 0)
        flag(ValidityReason::InconsistentEliminations);
    if (r.reason == RoundEndReason::EliminationOfCT && st.alive_ct > 0)
        flag(ValidityReason::InconsistentEliminations);

    // Timer-driven reasons may fire up to the duration tolerance early, so
    // retry the recomputation with the same grace before declaring a
    // contradiction. More specific flags above suppress the generic one.
    const Tick tol = 2 * static_cast<Tick>(tick_rate);
    if (verdict.reasons.empty()) {
        auto recomputed = check_win_condition(st, r.end_tick, vars, tick_rate);
        if (!recomputed || recomputed->second != r.reason)
            recomputed = check_win_condition(st, r.end_tick + tol, vars, tick_rate);
        if (!recomputed || recomputed->second != r.reason) flag(ValidityReason::NoWinCondition);
    }

    // Duration arithmetic, all with the same +/- tolerance.
    const Tick dur = r.end_tick - r.start_tick;
    const Tick freeze = static_cast<Tick>(vars.freeze_time_secs) * tick_rate;
    const Tick round_len = static_cast<Tick>(vars.round_time_secs) * tick_rate;
    const Tick bomb_len = static_cast<Tick>(vars.bomb_timer_secs) * tick_rate;
    bool duration_ok = dur >= freeze - tol;
    switch (r.reason) {
        case RoundEndReason::TargetSaved:
            duration_ok = duration_ok && std::llabs(dur - (freeze + round_len)) <= tol;
            break;
        case RoundEndReason::BombExploded:
            if (r.bomb_plant_tick)
                duration_ok = duration_ok &&
                              std::llabs((r.end_tick - *r.bomb_plant_tick) - bomb_len) <= tol;
            duration_ok = duration_ok && dur <= freeze + round_len + bomb_len + tol;
            break;
        case RoundEndReason::BombDefused:
            if (r.bomb_plant_tick) duration_ok = duration_ok && r.end_tick >= *r.bomb_plant_tick;
            duration_ok = duration_ok && dur <= freeze + round_len + bomb_len + tol;
            break;
        case RoundEndReason::EliminationOfT:
        case RoundEndReason::EliminationOfCT: {
            const Tick limit = r.bomb_plant_tick
                                   ? (*r.bomb_plant_tick - r.start_tick) + bomb_len
                                   : freeze + round_len;
            duration_ok = duration_ok && dur <= limit + tol;
            break;
        }
    }
    if (!duration_ok) flag(ValidityReason::DurationOutOfBounds);

    if (prev_scores &&
        (r.ct_score < prev_scores->first || r.t_score < prev_scores->second))
        flag(ValidityReason::ScoreRegression);

    return verdict;
}

void reconcile_match(std::vector<RawRound>& rounds, const ServerVars& vars, CleaningStats& stats) {
    if (rounds.empty()) throw EmptyMatch();
    const int clinch = vars.max_regulation_rounds / 2 + 1;
    int ct = 0, t = 0;
    std::size_t kept = 0;
    for (RawRound& rr : rounds) {
        if (ct >= clinch || t >= clinch) break;  // anything past the clinch is errant
        GameRound& r = rr.round;
        r.round_num = static_cast<int>(kept) + 1;
        (r.winner == Side::CT ? ct : t) += 1;
        if (r.ct_score != ct || r.t_score != t) {
            ++stats.score_repairs;
            r.ct_score = ct;
            r.t_score = t;
        }
        ++kept;
    }
    stats.dropped_invalid += static_cast<int>(rounds.size() - kept);
    rounds.resize(kept);
}

}  // namespace demoforge
