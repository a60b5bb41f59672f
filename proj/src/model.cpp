#include "demoforge/model.hpp"

namespace demoforge {

Side opposite(Side s) { return s == Side::CT ? Side::T : Side::CT; }

Side winner_for_reason(RoundEndReason reason) {
    switch (reason) {
        case RoundEndReason::EliminationOfT:
        case RoundEndReason::BombDefused:
        case RoundEndReason::TargetSaved:
            return Side::CT;
        case RoundEndReason::EliminationOfCT:
        case RoundEndReason::BombExploded:
            return Side::T;
    }
    throw Error("winner_for_reason: bad reason code");
}

bool legal_phase_transition(Phase from, Phase to) {
    switch (from) {
        case Phase::Freeze:
            return to == Phase::Default;
        case Phase::Default:
            return to == Phase::BombPlanted || to == Phase::RoundEnd;
        case Phase::BombPlanted:
            return to == Phase::RoundEnd;
        case Phase::RoundEnd:
            return to == Phase::Freeze;
    }
    return false;
}

const char* side_name(Side s) { return s == Side::CT ? "CT" : "T"; }

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Freeze: return "Freeze";
        case Phase::Default: return "Default";
        case Phase::BombPlanted: return "BombPlanted";
        case Phase::RoundEnd: return "RoundEnd";
    }
    return "?";
}

const char* reason_name(RoundEndReason r) {
    switch (r) {
        case RoundEndReason::EliminationOfT: return "EliminationOfT";
        case RoundEndReason::EliminationOfCT: return "EliminationOfCT";
        case RoundEndReason::BombDefused: return "BombDefused";
        case RoundEndReason::BombExploded: return "BombExploded";
        case RoundEndReason::TargetSaved: return "TargetSaved";
    }
    return "?";
}

const char* site_name(BombSite s) { return s == BombSite::A ? "A" : "B"; }

const char* grenade_name(GrenadeType g) {
    switch (g) {
        case GrenadeType::HE: return "HE";
        case GrenadeType::Smoke: return "Smoke";
        case GrenadeType::Molotov: return "Molotov";
        case GrenadeType::Flashbang: return "Flashbang";
        case GrenadeType::Decoy: return "Decoy";
    }
    return "?";
}

std::optional<Side> side_from_name(const std::string& s) {
    if (s == "CT") return Side::CT;
    if (s == "T") return Side::T;
    return std::nullopt;
}

std::optional<Phase> phase_from_name(const std::string& s) {
    for (auto p : {Phase::Freeze, Phase::Default, Phase::BombPlanted, Phase::RoundEnd})
        if (s == phase_name(p)) return p;
    return std::nullopt;
}

std::optional<RoundEndReason> reason_from_name(const std::string& s) {
    for (auto r : {RoundEndReason::EliminationOfT, RoundEndReason::EliminationOfCT,
                   RoundEndReason::BombDefused, RoundEndReason::BombExploded,
                   RoundEndReason::TargetSaved})
        if (s == reason_name(r)) return r;
    return std::nullopt;
}

std::optional<BombSite> site_from_name(const std::string& s) {
    if (s == "A") return BombSite::A;
    if (s == "B") return BombSite::B;
    return std::nullopt;
}

std::optional<GrenadeType> grenade_from_name(const std::string& s) {
    for (auto g : {GrenadeType::HE, GrenadeType::Smoke, GrenadeType::Molotov,
                   GrenadeType::Flashbang, GrenadeType::Decoy})
        if (s == grenade_name(g)) return g;
    return std::nullopt;
}

static const char* const kWeaponNames[kWeaponCount] = {
    "Knife", "Pistol", "SMG", "Rifle", "AWP", "Shotgun", "HEGrenade", "Molotov",
};

const char* weapon_name(std::uint8_t code) {
    return code < kWeaponCount ? kWeaponNames[code] : "Unknown";
}

std::optional<std::uint8_t> weapon_from_name(const std::string& s) {
    for (std::uint8_t i = 0; i < kWeaponCount; ++i)
        if (s == kWeaponNames[i]) return i;
    return std::nullopt;
}

TeamState recompute_team_aggregates(std::span<const PlayerState> players) {
    if (players.size() != 5)
        throw InvalidTeam("team must have exactly 5 players, got " +
                          std::to_string(players.size()));
    for (const auto& p : players)
        if (p.side != players.front().side) throw InvalidTeam("players are not all on one side");

    TeamState team;
    team.side = players.front().side;
    team.players.assign(players.begin(), players.end());
    for (const auto& p : players) {
        if (p.hp == 0) continue;  // dead players contribute nothing
        team.alive_count += 1;
        team.total_hp += p.hp;
        team.total_armor += p.armor;
        team.total_eq_val += p.eq_val;
        team.grenades += p.grenades_remaining;
        team.helmets += p.has_helmet ? 1 : 0;
        team.defuse_kits += p.has_defuse_kit ? 1 : 0;
        team.players_in_bomb_zone += p.in_bomb_zone ? 1 : 0;
    }
    return team;
}

}  // namespace demoforge
