#pragma once

#include <string>
#include <vector>

#include "demoforge/codec.hpp"
#include "demoforge/model.hpp"
#include "demoforge/rng.hpp"

namespace demoforge::testing {

inline std::vector<PlayerInfo> test_roster() {
    static const char* const names[10] = {"alpha",   "bravo", "charlie", "delta", "echo",
                                          "foxtrot", "golf",  "hotel",   "india", "juliett"};
    std::vector<PlayerInfo> roster;
    for (int i = 0; i < 10; ++i)
        roster.push_back({static_cast<std::uint8_t>(i + 1), names[i], i < 5 ? Side::CT : Side::T});
    return roster;
}

inline EsdmHeader test_header(int tick_rate = 128, ServerVars vars = {}) {
    EsdmHeader h;
    h.version = 1;
    h.tick_rate = tick_rate;
    h.map_name = "de_forge";
    h.vars = vars;
    h.vars.max_regulation_rounds = 2 * h.vars.side_switch_after;
    h.players = test_roster();
    return h;
}

inline Vec3 random_pos(Rng& rng) {
    return Vec3{static_cast<float>(rng.uniform(kMapMin, kMapMax)),
                static_cast<float>(rng.uniform(kMapMin, kMapMax)),
                static_cast<float>(rng.uniform(0.0, 256.0))};
}

inline PlayerState random_player_state(Rng& rng) {
    PlayerState s;
    s.player_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
    s.side = rng.bernoulli(0.5) ? Side::CT : Side::T;
    s.pos = random_pos(rng);
    s.vel = Vec3{static_cast<float>(rng.uniform(-250.0, 250.0)),
                 static_cast<float>(rng.uniform(-250.0, 250.0)), 0.0f};
    s.view_yaw = static_cast<float>(rng.uniform(0.0, 359.99));
    s.view_pitch = static_cast<float>(rng.uniform(-90.0, 90.0));
    s.hp = static_cast<std::uint8_t>(rng.uniform_int(0, 100));
    s.armor = static_cast<std::uint8_t>(rng.uniform_int(0, 100));
    s.money = static_cast<std::uint16_t>(rng.uniform_int(0, 65535));
    s.eq_val = static_cast<std::uint16_t>(rng.uniform_int(0, 65535));
    s.active_weapon = static_cast<std::uint8_t>(rng.uniform_int(0, kWeaponCount - 1));
    s.ping = static_cast<std::uint16_t>(rng.uniform_int(0, 500));
    s.alive = s.hp > 0;
    s.blinded = rng.bernoulli(0.1);
    s.in_bomb_zone = rng.bernoulli(0.1);
    s.has_helmet = rng.bernoulli(0.5);
    s.has_defuse_kit = rng.bernoulli(0.3);
    s.has_bomb = s.side == Side::T && rng.bernoulli(0.1);
    s.grenades_remaining = static_cast<std::uint8_t>(rng.uniform_int(0, 4));
    return s;
}

// One random event of any wire type with all fields in encodable ranges.
inline EventBody random_event_body(Rng& rng) {
    switch (rng.uniform_int(0, 13)) {
        case 0: {
            DamageEvent e;
            e.attacker_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.victim_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.attacker_pos = random_pos(rng);
            e.victim_pos = random_pos(rng);
            e.hp_damage = static_cast<std::uint8_t>(rng.uniform_int(1, 100));
            e.weapon = static_cast<std::uint8_t>(rng.uniform_int(0, kWeaponCount - 1));
            return e;
        }
        case 1: {
            KillEvent e;
            e.attacker_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.victim_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.attacker_pos = random_pos(rng);
            e.victim_pos = random_pos(rng);
            e.weapon = static_cast<std::uint8_t>(rng.uniform_int(0, kWeaponCount - 1));
            e.headshot = rng.bernoulli(0.3);
            return e;
        }
        case 2: {
            FlashEvent e;
            e.attacker_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.victim_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.flash_duration_secs = static_cast<float>(rng.uniform(0.0, 5.0));
            return e;
        }
        case 3: {
            BombPlantEvent e;
            e.player_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.site = rng.bernoulli(0.5) ? BombSite::A : BombSite::B;
            e.pos = random_pos(rng);
            return e;
        }
        case 4: return BombDefuseEvent{static_cast<std::uint8_t>(rng.uniform_int(1, 10))};
        case 5: return BombExplodeEvent{};
        case 6: {
            GrenadeThrowEvent e;
            e.player_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.grenade_type = static_cast<GrenadeType>(rng.uniform_int(0, 4));
            e.throw_pos = random_pos(rng);
            e.land_pos = random_pos(rng);
            return e;
        }
        case 7: {
            WeaponFireEvent e;
            e.player_id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
            e.pos = random_pos(rng);
            e.weapon = static_cast<std::uint8_t>(rng.uniform_int(0, kWeaponCount - 1));
            return e;
        }
        case 8: return PlayerUpdateEvent{random_player_state(rng)};
        case 9: return PhaseChangeEvent{static_cast<Phase>(rng.uniform_int(0, 3))};
        case 10: return RoundStartEvent{static_cast<int>(rng.uniform_int(1, 30))};
        case 11: {
            const auto reason = static_cast<RoundEndReason>(rng.uniform_int(0, 4));
            return RoundEndEvent{winner_for_reason(reason), reason};
        }
        case 12: return MatchStartEvent{};
        default: return RestartMarkerEvent{};
    }
}

inline std::vector<GameEvent> random_event_stream(Rng& rng, int count) {
    std::vector<GameEvent> events;
    Tick tick = rng.uniform_int(0, 1000);
    for (int i = 0; i < count; ++i) {
        tick += rng.uniform_int(0, 3);
        events.push_back({tick, random_event_body(rng)});
    }
    return events;
}

inline EsdmHeader random_header(Rng& rng) {
    EsdmHeader h;
    h.version = 1;
    h.tick_rate = static_cast<int>(rng.uniform_int(16, 256));
    h.map_name = "map_" + std::to_string(rng.uniform_int(0, 9999));
    h.vars.freeze_time_secs = static_cast<int>(rng.uniform_int(1, 30));
    h.vars.round_time_secs = static_cast<int>(rng.uniform_int(10, 200));
    h.vars.bomb_timer_secs = static_cast<int>(rng.uniform_int(5, 60));
    h.vars.round_end_secs = static_cast<int>(rng.uniform_int(1, 10));
    h.vars.side_switch_after = static_cast<int>(rng.uniform_int(1, 20));
    h.vars.max_regulation_rounds = 2 * h.vars.side_switch_after;
    std::vector<int> order{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    rng.shuffle(order);
    for (int i = 0; i < 10; ++i)
        h.players.push_back({static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                             "p" + std::to_string(order[i]), order[i] < 5 ? Side::CT : Side::T});
    return h;
}

inline PlayerState basic_state(std::uint8_t id, Side side, float x = 0.0f, float y = 0.0f,
                               int eq_val = 0) {
    PlayerState s;
    s.player_id = id;
    s.side = side;
    s.pos = Vec3{x, y, 0.0f};
    s.hp = 100;
    s.alive = true;
    s.eq_val = static_cast<std::uint16_t>(eq_val);
    return s;
}

// Hand-fixture builder; append in tick order.
struct EventStream {
    std::vector<GameEvent> events;

    EventStream& add(Tick t, EventBody body) {
        events.push_back({t, std::move(body)});
        return *this;
    }

    // One update per roster player, CT ids 1..5 and T ids 6..10 by default.
    EventStream& all_updates(Tick t, bool flipped = false, int eq_per_player = 0) {
        for (const PlayerInfo& p : test_roster()) {
            const Side side = flipped ? opposite(p.start_side) : p.start_side;
            add(t, PlayerUpdateEvent{basic_state(p.id, side, float(p.id), 0.0f, eq_per_player)});
        }
        return *this;
    }
};

}  // namespace demoforge::testing
