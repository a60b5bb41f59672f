#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace demoforge {

// Base class for all recoverable input/domain errors. The CLI maps these to
// exit code 1; anything else is treated as an internal error (exit 2).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidTeam : Error {
    using Error::Error;
};

using Tick = std::int64_t;

// ---------------------------------------------------------------------------
// Core enums
// ---------------------------------------------------------------------------

enum class Side : std::uint8_t { CT = 0, T = 1 };

enum class Phase : std::uint8_t { Freeze = 0, Default = 1, BombPlanted = 2, RoundEnd = 3 };

enum class RoundEndReason : std::uint8_t {
    EliminationOfT = 0,
    EliminationOfCT = 1,
    BombDefused = 2,
    BombExploded = 3,
    TargetSaved = 4,
};

enum class BombSite : std::uint8_t { A = 0, B = 1 };

enum class GrenadeType : std::uint8_t { HE = 0, Smoke = 1, Molotov = 2, Flashbang = 3, Decoy = 4 };

Side opposite(Side s);

// Every end reason maps to exactly one winning side.
Side winner_for_reason(RoundEndReason reason);

// The round phase graph has exactly five legal edges:
// Freeze->Default, Default->BombPlanted, Default->RoundEnd,
// BombPlanted->RoundEnd, RoundEnd->Freeze.
bool legal_phase_transition(Phase from, Phase to);

const char* side_name(Side s);
const char* phase_name(Phase p);
const char* reason_name(RoundEndReason r);
const char* site_name(BombSite s);
const char* grenade_name(GrenadeType g);

std::optional<Side> side_from_name(const std::string& s);
std::optional<Phase> phase_from_name(const std::string& s);
std::optional<RoundEndReason> reason_from_name(const std::string& s);
std::optional<BombSite> site_from_name(const std::string& s);
std::optional<GrenadeType> grenade_from_name(const std::string& s);

// Weapon codes used by the ESDM payloads. The table is intentionally small;
// weapons have no gameplay semantics here beyond labeling events.
inline constexpr std::uint8_t kWeaponCount = 8;
const char* weapon_name(std::uint8_t code);
std::optional<std::uint8_t> weapon_from_name(const std::string& s);

// ---------------------------------------------------------------------------
// Abstract map geometry. Maps differ only by name label; all share one
// coordinate box and two fixed bomb site anchors.
// ---------------------------------------------------------------------------

struct Vec3 {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;
    bool operator==(const Vec3&) const = default;
};

inline constexpr float kMapMin = 0.0f;
inline constexpr float kMapMax = 3200.0f;
inline constexpr float kMapZMax = 256.0f;
inline constexpr float kMaxPlayerSpeed = 250.0f;  // map units / second
inline constexpr Vec3 kSiteAPos{2200.0f, 2600.0f, 0.0f};
inline constexpr Vec3 kSiteBPos{2200.0f, 600.0f, 0.0f};

inline Vec3 site_pos(BombSite s) { return s == BombSite::A ? kSiteAPos : kSiteBPos; }

// ---------------------------------------------------------------------------
// Match configuration records
// ---------------------------------------------------------------------------

struct MatchMeta {
    std::string map_name;
    int tick_rate = 128;  // ticks per second, >= 1
    int demo_version = 1;
    std::string source_file;
    bool operator==(const MatchMeta&) const = default;
};

struct ServerVars {
    int freeze_time_secs = 20;
    int round_time_secs = 115;
    int bomb_timer_secs = 40;
    int round_end_secs = 5;
    int max_regulation_rounds = 30;
    int side_switch_after = 15;
    // World-effect lifetimes are parser-side extensions with fixed defaults.
    double fire_lifetime_secs = 7.0;
    double smoke_lifetime_secs = 18.0;
    bool operator==(const ServerVars&) const = default;
};

struct ParserParams {
    int parse_rate = 2;  // frames per second, 1 <= parse_rate <= tick_rate
    bool drop_incomplete_rounds = true;
    bool operator==(const ParserParams&) const = default;
};

struct PlayerInfo {
    std::uint8_t id = 0;
    std::string name;
    Side start_side = Side::CT;
    bool operator==(const PlayerInfo&) const = default;
};

// ---------------------------------------------------------------------------
// Player and event records
// ---------------------------------------------------------------------------

struct PlayerState {
    std::uint8_t player_id = 0;
    Side side = Side::CT;
    Vec3 pos;
    Vec3 vel;  // dead players carry vel = (0,0,0)
    float view_yaw = 0.0f;    // degrees [0, 360)
    float view_pitch = 0.0f;  // degrees [-90, 90]
    std::uint8_t hp = 100;    // alive <=> hp > 0
    std::uint8_t armor = 0;
    std::uint16_t money = 0;
    std::uint16_t eq_val = 0;
    std::uint8_t active_weapon = 0;
    std::uint16_t ping = 0;
    bool alive = true;
    bool blinded = false;
    bool in_bomb_zone = false;
    bool has_helmet = false;
    bool has_defuse_kit = false;
    bool has_bomb = false;
    std::uint8_t grenades_remaining = 0;  // inventory count, 0..4
    bool operator==(const PlayerState&) const = default;
};

struct DamageEvent {
    std::uint8_t attacker_id = 0;
    std::uint8_t victim_id = 0;
    Vec3 attacker_pos;
    Vec3 victim_pos;
    std::uint8_t hp_damage = 0;  // 1..100
    std::uint8_t weapon = 0;
    bool operator==(const DamageEvent&) const = default;
};

struct KillEvent {
    std::uint8_t attacker_id = 0;
    std::uint8_t victim_id = 0;
    Vec3 attacker_pos;
    Vec3 victim_pos;
    std::uint8_t weapon = 0;
    bool headshot = false;
    bool operator==(const KillEvent&) const = default;
};

struct FlashEvent {
    std::uint8_t attacker_id = 0;
    std::uint8_t victim_id = 0;
    float flash_duration_secs = 0.0f;
    bool operator==(const FlashEvent&) const = default;
};

struct BombPlantEvent {
    std::uint8_t player_id = 0;
    BombSite site = BombSite::A;
    Vec3 pos;
    bool operator==(const BombPlantEvent&) const = default;
};

struct BombDefuseEvent {
    std::uint8_t player_id = 0;
    bool operator==(const BombDefuseEvent&) const = default;
};

struct BombExplodeEvent {
    bool operator==(const BombExplodeEvent&) const = default;
};

struct GrenadeThrowEvent {
    std::uint8_t player_id = 0;
    GrenadeType grenade_type = GrenadeType::HE;
    Vec3 throw_pos;
    Vec3 land_pos;
    bool operator==(const GrenadeThrowEvent&) const = default;
};

struct WeaponFireEvent {
    std::uint8_t player_id = 0;
    Vec3 pos;
    std::uint8_t weapon = 0;
    bool operator==(const WeaponFireEvent&) const = default;
};

struct PlayerUpdateEvent {
    PlayerState state;
    bool operator==(const PlayerUpdateEvent&) const = default;
};

struct PhaseChangeEvent {
    Phase phase = Phase::Freeze;
    bool operator==(const PhaseChangeEvent&) const = default;
};

struct RoundStartEvent {
    int round_num = 0;
    bool operator==(const RoundStartEvent&) const = default;
};

struct RoundEndEvent {
    Side winner = Side::CT;
    RoundEndReason reason = RoundEndReason::EliminationOfT;
    bool operator==(const RoundEndEvent&) const = default;
};

struct MatchStartEvent {
    bool operator==(const MatchStartEvent&) const = default;
};

struct RestartMarkerEvent {
    bool operator==(const RestartMarkerEvent&) const = default;
};

using EventBody = std::variant<DamageEvent, KillEvent, FlashEvent, BombPlantEvent, BombDefuseEvent,
                               BombExplodeEvent, GrenadeThrowEvent, WeaponFireEvent,
                               PlayerUpdateEvent, PhaseChangeEvent, RoundStartEvent, RoundEndEvent,
                               MatchStartEvent, RestartMarkerEvent>;

struct GameEvent {
    Tick tick = 0;
    EventBody body;
    bool operator==(const GameEvent&) const = default;
};

template <typename T>
bool event_is(const GameEvent& e) {
    return std::holds_alternative<T>(e.body);
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

// Bomb world state at one frame: carried (carrier_id set) or planted
// (planted_site + plant_tick + pos set). Exactly one of the two forms is
// active.
struct BombState {
    std::optional<std::uint8_t> carrier_id;
    std::optional<BombSite> planted_site;
    std::optional<Tick> plant_tick;
    std::optional<Vec3> pos;  // plant location; carried bombs move with the carrier
    bool operator==(const BombState&) const = default;
};

struct AreaEffect {
    Vec3 pos;
    Tick expiry_tick = 0;
    bool operator==(const AreaEffect&) const = default;
};

struct TeamState {
    Side side = Side::CT;
    std::vector<PlayerState> players;  // length 5, dead players included
    int alive_count = 0;
    int total_hp = 0;
    int total_armor = 0;
    int total_eq_val = 0;
    int helmets = 0;
    int defuse_kits = 0;
    int grenades = 0;
    int players_in_bomb_zone = 0;
    bool operator==(const TeamState&) const = default;
};

struct Frame {
    Tick tick = 0;
    double clock_secs = 0.0;  // seconds remaining in the current phase
    Phase phase = Phase::Freeze;
    BombState bomb;
    std::vector<AreaEffect> fires;
    std::vector<AreaEffect> smokes;
    TeamState ct;
    TeamState t;
    bool operator==(const Frame&) const = default;
};

// Aggregates dead players contribute nothing to; positions persist, velocity
// is zeroed by the producer. Throws InvalidTeam unless exactly 5 players of
// one side are given.
TeamState recompute_team_aggregates(std::span<const PlayerState> players);

// ---------------------------------------------------------------------------
// Rounds and documents
// ---------------------------------------------------------------------------

struct GameRound {
    int round_num = 0;  // 1-based after reconciliation
    Tick start_tick = 0;
    Tick freeze_end_tick = 0;
    std::optional<Tick> bomb_plant_tick;
    Tick end_tick = 0;
    Tick official_end_tick = 0;
    Side winner = Side::CT;
    RoundEndReason reason = RoundEndReason::EliminationOfT;
    int ct_score = 0;  // cumulative side-attributed score after this round
    int t_score = 0;
    int ct_start_eq_val = 0;
    int t_start_eq_val = 0;
    std::vector<GameEvent> damages;
    std::vector<GameEvent> kills;
    std::vector<GameEvent> flashes;
    std::vector<GameEvent> bomb_events;
    std::vector<GameEvent> grenades;
    std::vector<GameEvent> weapon_fires;
    std::vector<Frame> frames;
    // Validation flags retained only when invalid rounds are kept.
    std::vector<std::string> invalid_reasons;
    bool operator==(const GameRound&) const = default;
};

struct Trajectory {
    std::uint8_t player_id = 0;
    int round_num = 0;
    std::vector<std::pair<Tick, Vec3>> samples;  // ticks strictly increasing
    bool operator==(const Trajectory&) const = default;
};

struct CleaningStats {
    int dropped_invalid = 0;
    int orphan_round_ends = 0;
    int dropped_incomplete = 0;
    int discarded_pre_match = 0;
    int score_repairs = 0;
    int winner_conflicts = 0;
    int ignored_phase_changes = 0;
    int unknown_records = 0;
    bool operator==(const CleaningStats&) const = default;
};

struct DemoDocument {
    MatchMeta meta;
    ServerVars server_vars;
    ParserParams parser_params;
    std::vector<PlayerInfo> players;
    std::vector<GameRound> game_rounds;
    CleaningStats cleaning;
    bool operator==(const DemoDocument&) const = default;
};

}  // namespace demoforge
