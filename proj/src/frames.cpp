#include "demoforge/frames.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace demoforge {

Tick frame_stride(int tick_rate, int parse_rate) {
    const Tick stride = std::llround(static_cast<double>(tick_rate) / parse_rate);
    return std::max<Tick>(1, stride);
}

double phase_duration_secs(Phase phase, const ServerVars& vars) {
    switch (phase) {
        case Phase::Freeze: return vars.freeze_time_secs;
        case Phase::Default: return vars.round_time_secs;
        case Phase::BombPlanted: return vars.bomb_timer_secs;
        case Phase::RoundEnd: return vars.round_end_secs;
    }
    return 0.0;
}

std::vector<Frame> sample_frames(const RawRound& rr, const ServerVars& vars,
                                 const ParserParams& params, int tick_rate,
                                 std::span<const PlayerInfo> roster) {
    const GameRound& r = rr.round;
    const Tick stride = frame_stride(tick_rate, params.parse_rate);

    // Latest consumed state per player; kills force the alive flag off even
    // if updates for the victim stop arriving. Frames that precede a player's
    // first update fall back to that first (freeze-start) snapshot, so it is
    // collected up front.
    std::array<std::optional<PlayerState>, 256> last{};
    std::array<std::optional<PlayerState>, 256> first{};
    for (const GameEvent& ev : rr.events)
        if (const auto* up = std::get_if<PlayerUpdateEvent>(&ev.body))
            if (!first[up->state.player_id]) first[up->state.player_id] = up->state;
    std::array<bool, 256> killed{};
    std::map<std::uint8_t, Side> team;
    for (const PlayerInfo& p : roster)
        team[p.id] = side_in_round(p, r.round_num, vars.side_switch_after);

    Phase phase = Phase::Freeze;
    Tick phase_start = r.start_tick;
    BombState bomb;
    std::vector<AreaEffect> fires;
    std::vector<AreaEffect> smokes;

    std::vector<Frame> frames;
    std::size_t next = 0;

    for (Tick frame_tick = r.start_tick; frame_tick <= r.end_tick; frame_tick += stride) {
        while (next < rr.events.size() && rr.events[next].tick <= frame_tick) {
            const GameEvent& ev = rr.events[next++];
            std::visit(
                [&](const auto& body) {
                    using T = std::decay_t<decltype(body)>;
                    if constexpr (std::is_same_v<T, PlayerUpdateEvent>) {
                        last[body.state.player_id] = body.state;
                        if (body.state.has_bomb && !bomb.planted_site)
                            bomb.carrier_id = body.state.player_id;
                        else if (bomb.carrier_id == body.state.player_id && !body.state.has_bomb)
                            bomb.carrier_id.reset();
                    } else if constexpr (std::is_same_v<T, PhaseChangeEvent>) {
                        phase = body.phase;
                        phase_start = ev.tick;
                    } else if constexpr (std::is_same_v<T, KillEvent>) {
                        killed[body.victim_id] = true;
                    } else if constexpr (std::is_same_v<T, BombPlantEvent>) {
                        bomb.planted_site = body.site;
                        bomb.plant_tick = ev.tick;
                        bomb.pos = body.pos;
                        bomb.carrier_id.reset();
                    } else if constexpr (std::is_same_v<T, GrenadeThrowEvent>) {
                        const Tick life =
                            body.grenade_type == GrenadeType::Molotov
                                ? std::llround(vars.fire_lifetime_secs * tick_rate)
                                : body.grenade_type == GrenadeType::Smoke
                                      ? std::llround(vars.smoke_lifetime_secs * tick_rate)
                                      : 0;
                        if (life > 0) {
                            auto& list = body.grenade_type == GrenadeType::Molotov ? fires : smokes;
                            list.push_back({body.land_pos, ev.tick + life});
                        }
                    }
                },
                ev.body);
        }

        const auto expired = [frame_tick](const AreaEffect& a) { return a.expiry_tick < frame_tick; };
        std::erase_if(fires, expired);
        std::erase_if(smokes, expired);

        Frame f;
        f.tick = frame_tick;
        f.phase = phase;
        const double elapsed = static_cast<double>(frame_tick - phase_start) / tick_rate;
        f.clock_secs = std::max(0.0, phase_duration_secs(phase, vars) - elapsed);
        f.bomb = bomb;
        f.fires = fires;
        f.smokes = smokes;

        std::vector<PlayerState> ct_players, t_players;
        for (const auto& [id, side] : team) {
            const auto& snap = last[id] ? last[id] : first[id];
            if (!snap)
                throw ParseError("no state for player " + std::to_string(int(id)) +
                                 " in round " + std::to_string(r.round_num));
            PlayerState s = *snap;
            s.side = side;
            if (killed[id]) {
                s.alive = false;
                s.hp = 0;
                s.vel = Vec3{};
            }
            (side == Side::CT ? ct_players : t_players).push_back(std::move(s));
        }
        f.ct = recompute_team_aggregates(ct_players);
        f.t = recompute_team_aggregates(t_players);
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<Trajectory> extract_trajectories(const GameRound& round) {
    std::map<std::uint8_t, Trajectory> tracks;
    for (const Frame& f : round.frames)
        for (const TeamState* team : {&f.ct, &f.t})
            for (const PlayerState& p : team->players) {
                Trajectory& t = tracks[p.player_id];
                if (t.samples.empty()) {
                    t.player_id = p.player_id;
                    t.round_num = round.round_num;
                }
                if (p.alive) t.samples.push_back({f.tick, p.pos});
            }
    std::vector<Trajectory> out;
    out.reserve(tracks.size());
    for (auto& [id, t] : tracks) out.push_back(std::move(t));
    return out;
}

}  // namespace demoforge
