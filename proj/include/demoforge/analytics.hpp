#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "demoforge/model.hpp"

namespace demoforge {

struct UnknownActionType : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Player statistics
// ---------------------------------------------------------------------------

struct PlayerStatLine {
    std::uint8_t player_id = 0;
    std::string name;  // filled from the roster when one is supplied
    int kills = 0;
    int deaths = 0;
    int headshots = 0;
    int damage = 0;
    int flashes_thrown = 0;
    int grenades_thrown = 0;
    int bomb_plants = 0;
    int bomb_defuses = 0;
    int rounds_played = 0;  // rounds the player appears in (events or frames)
    double adr = 0.0;       // damage / rounds_played

    bool operator==(const PlayerStatLine&) const = default;
};

// Aggregates the six event lists over all rounds, ordered by player id. The
// roster is optional and only supplies display names.
std::vector<PlayerStatLine> player_stats(std::span<const GameRound> rounds,
                                         std::span<const PlayerInfo> roster = {});

// Header row plus one line per player, comma-separated, UTF-8.
std::string player_stats_csv(std::span<const PlayerStatLine> lines);

// ---------------------------------------------------------------------------
// Corpus summary
// ---------------------------------------------------------------------------

struct CorpusSummary {
    int documents = 0;
    int rounds = 0;
    long long actions = 0;  // six event categories summed
    double actions_per_round = 0.0;
    double frames_per_round = 0.0;
    double bomb_plant_rate = 0.0;  // share of rounds with a plant
    // Keyed by the JSON event-list names (damages, kills, flashes,
    // bombEvents, grenades, weaponFires) and the round-end reason names.
    std::map<std::string, long long> action_counts;
    std::map<std::string, double> action_mix;  // share of all actions
    std::map<std::string, double> reason_mix;  // share of all rounds

    bool operator==(const CorpusSummary&) const = default;
};

CorpusSummary corpus_summary(std::span<const DemoDocument> docs);

// ---------------------------------------------------------------------------
// Action heatmaps
// ---------------------------------------------------------------------------

enum class ActionType { Damage, Kill, Flash, BombEvent, Grenade, WeaponFire };
enum class CoordSelector { Actor, Victim, Throw, Land };

// Names as used on the command line: damage, kill, flash, bombEvent,
// grenade, weaponFire / actor, victim, throw, land.
std::string_view action_type_name(ActionType a);
ActionType action_type_from_name(std::string_view name);      // throws UnknownActionType
std::string_view coord_selector_name(CoordSelector c);
CoordSelector coord_selector_from_name(std::string_view name);  // throws UnknownActionType

struct GridSpec {
    double xmin = 0.0, xmax = 1.0;
    double ymin = 0.0, ymax = 1.0;
    int nx = 1, ny = 1;

    bool operator==(const GridSpec&) const = default;
};

struct HeatmapGrid {
    GridSpec spec;
    std::vector<long long> counts;  // row-major, counts[iy * nx + ix]
    long long out_of_bounds = 0;

    long long total() const;
    long long at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * spec.nx + ix]; }
};

// Bins the selected coordinate of every matching action over the whole
// corpus. Bounds are edge-inclusive; points outside are counted separately.
// Throws UnknownActionType when the selector does not apply to the action
// (flash events carry no coordinates; bomb events bin plant positions only).
HeatmapGrid action_heatmap(std::span<const DemoDocument> docs, ActionType action,
                           CoordSelector coord, const GridSpec& spec);

// Smallest bounds covering every selected point (for CLI defaults); a padded
// unit box when no points match.
GridSpec fit_bounds(std::span<const DemoDocument> docs, ActionType action, CoordSelector coord,
                    int nx, int ny);

}  // namespace demoforge
