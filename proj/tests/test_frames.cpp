#include <doctest.h>

#include <set>

#include "demoforge/frames.hpp"
#include "helpers.hpp"

using namespace demoforge;
using namespace demoforge::testing;

namespace {

constexpr int kTickRate = 128;
const ServerVars kVars{};

// A plain round: freeze from start, play phase after it, end as given. One
// update per player at the start plus any extra events supplied.
RawRound plain_round(Tick start, Tick end, std::vector<GameEvent> extra = {}) {
    EventStream s;
    s.add(start, RoundStartEvent{1});
    s.add(start, PhaseChangeEvent{Phase::Freeze});
    s.all_updates(start);
    s.add(start + 20 * kTickRate, PhaseChangeEvent{Phase::Default});
    for (auto& ev : extra) s.add(ev.tick, std::move(ev.body));
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const GameEvent& a, const GameEvent& b) { return a.tick < b.tick; });

    RawRound rr;
    rr.round.round_num = 1;
    rr.round.start_tick = start;
    rr.round.freeze_end_tick = start + 20 * kTickRate;
    rr.round.end_tick = end;
    rr.round.official_end_tick = end + 5 * kTickRate;
    rr.events = std::move(s.events);
    return rr;
}

std::vector<Frame> sample(const RawRound& rr, int parse_rate = 2) {
    ParserParams params;
    params.parse_rate = parse_rate;
    return sample_frames(rr, kVars, params, kTickRate, test_roster());
}

}  // namespace

TEST_CASE("frame stride rounds the tick ratio and never hits zero") {
    CHECK(frame_stride(128, 2) == 64);
    CHECK(frame_stride(128, 128) == 1);
    CHECK(frame_stride(64, 5) == 13);   // 12.8 rounds up
    CHECK(frame_stride(32, 3) == 11);   // 10.67 rounds up
    CHECK(frame_stride(2, 10) == 1);    // ratio below one clamps to every tick
}

TEST_CASE("a ninety-four second round yields a frame every half second") {
    const RawRound rr = plain_round(0, 94 * kTickRate);
    const auto frames = sample(rr);
    CHECK(frames.size() == 189);  // ticks 0, 64, ..., 12032
    CHECK(std::abs(static_cast<int>(frames.size()) - 188) <= 1);

    for (std::size_t i = 1; i < frames.size(); ++i)
        CHECK(frames[i].tick - frames[i - 1].tick == 64);
    CHECK(frames.front().tick == 0);
    CHECK(frames.back().tick == 94 * kTickRate);
}

TEST_CASE("sampling at the tick rate reproduces raw updates") {
    std::vector<GameEvent> extra;
    for (Tick t = 0; t <= 20; ++t) {
        PlayerState s = basic_state(1, Side::CT, static_cast<float>(t), 0.0f);
        extra.push_back({t, PlayerUpdateEvent{s}});
    }
    const RawRound rr = plain_round(0, 20, std::move(extra));
    const auto frames = sample(rr, kTickRate);
    REQUIRE(frames.size() == 21);
    for (Tick t = 0; t <= 20; ++t) {
        CHECK(frames[t].tick == t);
        CHECK(frames[t].ct.players.front().player_id == 1);
        CHECK(frames[t].ct.players.front().pos.x == doctest::Approx(static_cast<float>(t)));
    }
}

TEST_CASE("frames at a lower parse rate are a tick-subset of a higher one") {
    const RawRound rr = plain_round(100, 100 + 30 * kTickRate);
    const auto coarse = sample(rr, 2);
    const auto fine = sample(rr, 4);
    std::set<Tick> fine_ticks;
    for (const auto& f : fine) fine_ticks.insert(f.tick);
    for (const auto& f : coarse) CHECK(fine_ticks.count(f.tick) == 1);
}

TEST_CASE("smokes persist for eighteen seconds from their landing") {
    std::vector<GameEvent> extra;
    extra.push_back({1000, GrenadeThrowEvent{6, GrenadeType::Smoke, {}, Vec3{10, 20, 0}}});
    const RawRound rr = plain_round(0, 40 * kTickRate, std::move(extra));
    const auto frames = sample(rr);
    bool seen = false;
    for (const auto& f : frames) {
        const bool inside = f.tick >= 1000 && f.tick <= 1000 + 18 * kTickRate;  // [1000, 3304]
        CHECK(f.smokes.size() == (inside ? 1u : 0u));
        if (inside) {
            CHECK(f.smokes.front().pos == Vec3{10, 20, 0});
            CHECK(f.smokes.front().expiry_tick == 3304);
            seen = true;
        }
    }
    CHECK(seen);
}

TEST_CASE("fires persist for seven seconds from their landing") {
    std::vector<GameEvent> extra;
    extra.push_back({2000, GrenadeThrowEvent{7, GrenadeType::Molotov, {}, Vec3{-5, 0, 0}}});
    extra.push_back({2000, GrenadeThrowEvent{7, GrenadeType::HE, {}, Vec3{1, 1, 0}}});  // no area
    const RawRound rr = plain_round(0, 40 * kTickRate, std::move(extra));
    const auto frames = sample(rr);
    for (const auto& f : frames) {
        const bool inside = f.tick >= 2000 && f.tick <= 2000 + 7 * kTickRate;
        CHECK(f.fires.size() == (inside ? 1u : 0u));
        CHECK(f.smokes.empty());
    }
}

TEST_CASE("the phase clock counts down and resets on transitions") {
    const RawRound rr = plain_round(0, 40 * kTickRate);
    const auto frames = sample(rr);
    // Frame 0: freeze just started, 20s on the clock.
    CHECK(frames[0].phase == Phase::Freeze);
    CHECK(frames[0].clock_secs == doctest::Approx(20.0));
    // One second in: 19s left.
    CHECK(frames[2].clock_secs == doctest::Approx(19.0));
    // Freeze ends at tick 2560; that frame starts the play phase at 115s.
    const auto& at_freeze_end = frames[2560 / 64];
    CHECK(at_freeze_end.phase == Phase::Default);
    CHECK(at_freeze_end.clock_secs == doctest::Approx(115.0));
    // Ten seconds into the play phase.
    CHECK(frames[(2560 + 1280) / 64].clock_secs == doctest::Approx(105.0));
}

TEST_CASE("a plant switches the clock to the bomb timer") {
    std::vector<GameEvent> extra;
    const Tick plant = 2560 + 1280;
    extra.push_back({plant, BombPlantEvent{6, BombSite::B, Vec3{3, 4, 0}}});
    extra.push_back({plant, PhaseChangeEvent{Phase::BombPlanted}});
    const RawRound rr = plain_round(0, plant + 30 * kTickRate, std::move(extra));
    const auto frames = sample(rr);

    const auto& before = frames[plant / 64 - 1];
    CHECK_FALSE(before.bomb.planted_site.has_value());
    const auto& at = frames[plant / 64];
    CHECK(at.phase == Phase::BombPlanted);
    CHECK(at.clock_secs == doctest::Approx(40.0));
    CHECK(at.bomb.planted_site == BombSite::B);
    CHECK(at.bomb.plant_tick == plant);
    CHECK_FALSE(at.bomb.carrier_id.has_value());
    // Five seconds after the plant.
    CHECK(frames[plant / 64 + 10].clock_secs == doctest::Approx(35.0));
}

TEST_CASE("the bomb carrier is tracked until the plant") {
    std::vector<GameEvent> extra;
    PlayerState carrier = basic_state(6, Side::T);
    carrier.has_bomb = true;
    extra.push_back({64, PlayerUpdateEvent{carrier}});
    const RawRound rr = plain_round(0, 10 * kTickRate, std::move(extra));
    const auto frames = sample(rr);
    CHECK_FALSE(frames[0].bomb.carrier_id.has_value());
    CHECK(frames[1].bomb.carrier_id == std::uint8_t{6});
    CHECK(frames.back().bomb.carrier_id == std::uint8_t{6});
}

TEST_CASE("kills force the victim dead in subsequent frames") {
    // Death lands between the 50th and 51st frames (ticks 3136 and 3200).
    std::vector<GameEvent> extra;
    extra.push_back({49 * 64 + 1, KillEvent{1, 6, {}, {}, 3, true}});
    const RawRound rr = plain_round(0, 94 * kTickRate, std::move(extra));
    const auto frames = sample(rr);
    REQUIRE(frames.size() == 189);

    auto find_six = [](const Frame& f) {
        for (const auto& p : f.t.players)
            if (p.player_id == 6) return p;
        REQUIRE(false);
        return PlayerState{};
    };
    const PlayerState alive = find_six(frames[49]);
    CHECK(alive.alive);
    CHECK(alive.hp == 100);
    const PlayerState dead = find_six(frames[50]);
    CHECK_FALSE(dead.alive);
    CHECK(dead.hp == 0);
    CHECK(dead.vel == Vec3{});
    CHECK(dead.pos == alive.pos);  // body stays where it fell
    CHECK(frames[50].t.alive_count == 4);

    // The trajectory carries exactly the 50 frames the player lived through.
    GameRound round = rr.round;
    round.frames = frames;
    const auto tracks = extract_trajectories(round);
    REQUIRE(tracks.size() == 10);
    for (const auto& t : tracks) {
        if (t.player_id == 6) {
            CHECK(t.samples.size() == 50);
        } else {
            CHECK(t.samples.size() == frames.size());
        }
        CHECK(t.round_num == round.round_num);
    }
}

TEST_CASE("trajectory samples add up to the alive counts") {
    std::vector<GameEvent> extra;
    extra.push_back({1500, KillEvent{1, 6, {}, {}, 3, false}});
    extra.push_back({4000, KillEvent{6, 2, {}, {}, 1, false}});
    const RawRound rr = plain_round(0, 60 * kTickRate, std::move(extra));
    GameRound round = rr.round;
    round.frames = sample(rr);
    const auto tracks = extract_trajectories(round);

    std::size_t from_frames = 0;
    for (const auto& f : round.frames)
        from_frames += static_cast<std::size_t>(f.ct.alive_count + f.t.alive_count);
    std::size_t from_tracks = 0;
    for (const auto& t : tracks) from_tracks += t.samples.size();
    CHECK(from_tracks == from_frames);

    for (const auto& t : tracks) {
        for (std::size_t i = 1; i < t.samples.size(); ++i)
            CHECK(t.samples[i].first > t.samples[i - 1].first);
    }
}

TEST_CASE("team aggregates match an independent tally") {
    std::vector<GameEvent> extra;
    PlayerState hurt = basic_state(2, Side::CT);
    hurt.hp = 40;
    hurt.armor = 50;
    hurt.has_helmet = true;
    hurt.grenades_remaining = 2;
    hurt.eq_val = 3100;
    extra.push_back({700, PlayerUpdateEvent{hurt}});
    extra.push_back({900, KillEvent{6, 3, {}, {}, 3, false}});
    const RawRound rr = plain_round(0, 20 * kTickRate, std::move(extra));

    for (const Frame& f : sample(rr)) {
        for (const TeamState* team : {&f.ct, &f.t}) {
            int alive = 0, hp = 0, armor = 0, eq = 0, helmets = 0, kits = 0, nades = 0, zone = 0;
            for (const auto& p : team->players) {
                if (!p.alive) continue;
                ++alive;
                hp += p.hp;
                armor += p.armor;
                eq += p.eq_val;
                helmets += p.has_helmet ? 1 : 0;
                kits += p.has_defuse_kit ? 1 : 0;
                nades += p.grenades_remaining;
                zone += p.in_bomb_zone ? 1 : 0;
            }
            CHECK(team->players.size() == 5);
            CHECK(team->alive_count == alive);
            CHECK(team->total_hp == hp);
            CHECK(team->total_armor == armor);
            CHECK(team->total_eq_val == eq);
            CHECK(team->helmets == helmets);
            CHECK(team->defuse_kits == kits);
            CHECK(team->grenades == nades);
            CHECK(team->players_in_bomb_zone == zone);
        }
    }
}

TEST_CASE("players keep their first snapshot until updates arrive") {
    // Player 1's only update comes two seconds in; earlier frames fall back
    // to that first snapshot instead of failing.
    EventStream s;
    s.add(0, RoundStartEvent{1});
    s.add(0, PhaseChangeEvent{Phase::Freeze});
    for (const PlayerInfo& p : test_roster())
        if (p.id != 1) s.add(0, PlayerUpdateEvent{basic_state(p.id, p.start_side)});
    s.add(256, PlayerUpdateEvent{basic_state(1, Side::CT, 77.0f, 0.0f)});

    RawRound rr;
    rr.round.round_num = 1;
    rr.round.start_tick = 0;
    rr.round.freeze_end_tick = 20 * kTickRate;
    rr.round.end_tick = 10 * kTickRate;
    rr.events = s.events;
    const auto frames = sample(rr);
    CHECK(frames[0].ct.players.front().pos.x == doctest::Approx(77.0f));

    // With no update for the player anywhere in the round, sampling fails.
    RawRound missing = rr;
    missing.events.pop_back();
    CHECK_THROWS_AS(static_cast<void>(sample(missing)), ParseError);
}

TEST_CASE("team membership follows the round number across the side switch") {
    EventStream s;
    s.add(0, RoundStartEvent{16});
    s.add(0, PhaseChangeEvent{Phase::Freeze});
    s.all_updates(0, /*flipped=*/true);
    RawRound rr;
    rr.round.round_num = 16;
    rr.round.start_tick = 0;
    rr.round.freeze_end_tick = 20 * kTickRate;
    rr.round.end_tick = 5 * kTickRate;
    rr.events = s.events;

    const auto frames = sample(rr);
    for (const auto& p : frames[0].ct.players) CHECK(p.player_id >= 6);  // header T side
    for (const auto& p : frames[0].t.players) CHECK(p.player_id <= 5);
}
