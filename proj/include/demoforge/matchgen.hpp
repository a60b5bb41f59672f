#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "demoforge/codec.hpp"
#include "demoforge/model.hpp"

namespace demoforge {

struct InvalidConfig : Error {
    using Error::Error;
};

struct UnsupportedKind : Error {
    using Error::Error;
};

// Expected events per second of active (post-freeze, pre-round-end) play.
struct EventIntensities {
    double weapon_fire = 1.8;
    double damage = 0.30;  // non-lethal damage; lethal damage is scripted per kill
    double grenade = 0.11;  // HE/smoke/molotov/decoy throws
    double flash = 0.16;    // flashbang throws, each paired with one Flash event
    bool operator==(const EventIntensities&) const = default;
};

struct GenConfig {
    std::uint64_t seed = 1;
    // 0 plays until one side clinches (or regulation ends); a positive value
    // produces exactly that many rounds, steering winners away from an early
    // clinch when necessary.
    int rounds = 0;
    int tick_rate = 128;
    std::string map_name = "de_forge";
    // CT round-win probability is sigmoid(2*skill_gap + equipment-difference
    // term); alive counts are even when the draw happens so only these two
    // terms act. Range [-1, 1].
    double skill_gap = 0.0;
    EventIntensities intensities;
    ServerVars vars;
    bool operator==(const GenConfig&) const = default;
};

// Scripted per-player totals, mirroring the stat-line counters.
struct PlayerTruth {
    int kills = 0;
    int deaths = 0;
    int headshots = 0;
    int damage = 0;
    int flashes_thrown = 0;
    int grenades_thrown = 0;
    int bomb_plants = 0;
    int bomb_defuses = 0;
    int rounds_played = 0;
    bool operator==(const PlayerTruth&) const = default;
};

// What the cleaner must recover for one round. Ticks are deliberately absent:
// anomaly injection may shift the stream in time but never changes these.
struct RoundTruth {
    int round_num = 0;
    Side winner = Side::CT;
    RoundEndReason reason = RoundEndReason::EliminationOfT;
    int ct_score = 0;  // cumulative, after this round
    int t_score = 0;
    bool bomb_planted = false;
    int ct_start_eq_val = 0;
    int t_start_eq_val = 0;
    // Event counts by category, exactly as emitted.
    int damages = 0;
    int kills = 0;
    int flashes = 0;
    int bomb_events = 0;
    int grenades = 0;
    int weapon_fires = 0;
    bool operator==(const RoundTruth&) const = default;
};

struct GroundTruth {
    std::vector<RoundTruth> rounds;
    std::map<std::uint8_t, PlayerTruth> players;
    int final_ct_score = 0;
    int final_t_score = 0;
    bool operator==(const GroundTruth&) const = default;
};

struct GeneratedMatch {
    EsdmHeader header;
    std::vector<GameEvent> events;
    GroundTruth truth;
};

// Produces a complete, clean event stream plus its ground truth. The stream
// obeys the legal phase graph and every win-condition timing rule, so the
// parser must reproduce the truth exactly. Identical config -> identical
// output. Throws InvalidConfig on out-of-range settings.
GeneratedMatch generate_match(const GenConfig& config);

enum class AnomalyKind { Restart, DuplicateRoundEnd, Truncation };

std::string_view anomaly_kind_name(AnomalyKind kind);
AnomalyKind anomaly_kind_from_name(std::string_view name);  // throws UnsupportedKind

// Corrupts a well-formed stream in a seeded location:
//   Restart          - junk warmup rounds and a stray MatchStart are prepended
//                      (the original stream shifts later in time),
//   DuplicateRoundEnd- one round's RoundEnd record appears twice,
//   Truncation       - a final partial round with no RoundEnd is appended.
// Ground truth is unchanged by construction; the cleaner must recover it.
std::vector<GameEvent> inject_anomalies(std::vector<GameEvent> events, AnomalyKind kind,
                                        std::uint64_t seed);

}  // namespace demoforge
