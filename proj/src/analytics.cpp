#include "demoforge/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace demoforge {

namespace {

struct StatAccumulator {
    std::map<std::uint8_t, PlayerStatLine> lines;
    std::map<std::uint8_t, std::set<int>> rounds_seen;

    PlayerStatLine& line(std::uint8_t id) {
        auto [it, inserted] = lines.try_emplace(id);
        if (inserted) it->second.player_id = id;
        return it->second;
    }

    void saw(std::uint8_t id, int round_num) {
        line(id);
        rounds_seen[id].insert(round_num);
    }
};

}  // namespace

std::vector<PlayerStatLine> player_stats(std::span<const GameRound> rounds,
                                         std::span<const PlayerInfo> roster) {
    StatAccumulator acc;
    for (const GameRound& round : rounds) {
        for (const GameEvent& ev : round.damages) {
            const auto& d = std::get<DamageEvent>(ev.body);
            acc.saw(d.attacker_id, round.round_num);
            acc.saw(d.victim_id, round.round_num);
            acc.line(d.attacker_id).damage += d.hp_damage;
        }
        for (const GameEvent& ev : round.kills) {
            const auto& k = std::get<KillEvent>(ev.body);
            acc.saw(k.attacker_id, round.round_num);
            acc.saw(k.victim_id, round.round_num);
            acc.line(k.attacker_id).kills += 1;
            acc.line(k.attacker_id).headshots += k.headshot ? 1 : 0;
            acc.line(k.victim_id).deaths += 1;
        }
        for (const GameEvent& ev : round.flashes) {
            const auto& f = std::get<FlashEvent>(ev.body);
            acc.saw(f.attacker_id, round.round_num);
            acc.saw(f.victim_id, round.round_num);
            acc.line(f.attacker_id).flashes_thrown += 1;
        }
        for (const GameEvent& ev : round.bomb_events) {
            if (const auto* plant = std::get_if<BombPlantEvent>(&ev.body)) {
                acc.saw(plant->player_id, round.round_num);
                acc.line(plant->player_id).bomb_plants += 1;
            } else if (const auto* defuse = std::get_if<BombDefuseEvent>(&ev.body)) {
                acc.saw(defuse->player_id, round.round_num);
                acc.line(defuse->player_id).bomb_defuses += 1;
            }
        }
        for (const GameEvent& ev : round.grenades) {
            const auto& g = std::get<GrenadeThrowEvent>(ev.body);
            acc.saw(g.player_id, round.round_num);
            acc.line(g.player_id).grenades_thrown += 1;
        }
        for (const GameEvent& ev : round.weapon_fires) {
            const auto& w = std::get<WeaponFireEvent>(ev.body);
            acc.saw(w.player_id, round.round_num);
        }
        if (!round.frames.empty()) {
            // the first frame already carries the full participant set
            const Frame& frame = round.frames.front();
            for (const TeamState* team : {&frame.ct, &frame.t})
                for (const PlayerState& p : team->players) acc.saw(p.player_id, round.round_num);
        }
    }

    std::vector<PlayerStatLine> out;
    out.reserve(acc.lines.size());
    for (auto& [id, line] : acc.lines) {
        line.rounds_played = static_cast<int>(acc.rounds_seen[id].size());
        line.adr = line.rounds_played > 0
                       ? static_cast<double>(line.damage) / line.rounds_played
                       : 0.0;
        for (const PlayerInfo& info : roster)
            if (info.id == id) {
                line.name = info.name;
                break;
            }
        out.push_back(std::move(line));
    }
    return out;
}

std::string player_stats_csv(std::span<const PlayerStatLine> lines) {
    std::string out =
        "playerId,name,kills,deaths,headshots,damage,flashesThrown,grenadesThrown,"
        "bombPlants,bombDefuses,roundsPlayed,adr\n";
    char buf[64];
    for (const PlayerStatLine& l : lines) {
        out += std::to_string(l.player_id);
        out += ',';
        out += l.name;  // generator names are plain ASCII identifiers
        for (const int v : {l.kills, l.deaths, l.headshots, l.damage, l.flashes_thrown,
                            l.grenades_thrown, l.bomb_plants, l.bomb_defuses, l.rounds_played}) {
            out += ',';
            out += std::to_string(v);
        }
        std::snprintf(buf, sizeof buf, ",%.2f\n", l.adr);
        out += buf;
    }
    return out;
}

CorpusSummary corpus_summary(std::span<const DemoDocument> docs) {
    CorpusSummary s;
    s.documents = static_cast<int>(docs.size());
    long long frames = 0;
    int plants = 0;
    std::map<std::string, int> reasons;

    for (const DemoDocument& doc : docs)
        for (const GameRound& round : doc.game_rounds) {
            s.rounds += 1;
            s.action_counts["damages"] += static_cast<long long>(round.damages.size());
            s.action_counts["kills"] += static_cast<long long>(round.kills.size());
            s.action_counts["flashes"] += static_cast<long long>(round.flashes.size());
            s.action_counts["bombEvents"] += static_cast<long long>(round.bomb_events.size());
            s.action_counts["grenades"] += static_cast<long long>(round.grenades.size());
            s.action_counts["weaponFires"] += static_cast<long long>(round.weapon_fires.size());
            frames += static_cast<long long>(round.frames.size());
            plants += round.bomb_plant_tick.has_value() ? 1 : 0;
            reasons[reason_name(round.reason)] += 1;
        }

    for (const auto& [name, count] : s.action_counts) s.actions += count;
    if (s.rounds > 0) {
        s.actions_per_round = static_cast<double>(s.actions) / s.rounds;
        s.frames_per_round = static_cast<double>(frames) / s.rounds;
        s.bomb_plant_rate = static_cast<double>(plants) / s.rounds;
        for (const auto& [name, count] : reasons)
            s.reason_mix[name] = static_cast<double>(count) / s.rounds;
    }
    if (s.actions > 0)
        for (const auto& [name, count] : s.action_counts)
            s.action_mix[name] = static_cast<double>(count) / static_cast<double>(s.actions);
    return s;
}

// ---------------------------------------------------------------------------
// Heatmaps
// ---------------------------------------------------------------------------

std::string_view action_type_name(ActionType a) {
    switch (a) {
        case ActionType::Damage: return "damage";
        case ActionType::Kill: return "kill";
        case ActionType::Flash: return "flash";
        case ActionType::BombEvent: return "bombEvent";
        case ActionType::Grenade: return "grenade";
        case ActionType::WeaponFire: return "weaponFire";
    }
    return "?";
}

ActionType action_type_from_name(std::string_view name) {
    for (const ActionType a : {ActionType::Damage, ActionType::Kill, ActionType::Flash,
                               ActionType::BombEvent, ActionType::Grenade, ActionType::WeaponFire})
        if (name == action_type_name(a)) return a;
    throw UnknownActionType("unknown action type '" + std::string(name) + "'");
}

std::string_view coord_selector_name(CoordSelector c) {
    switch (c) {
        case CoordSelector::Actor: return "actor";
        case CoordSelector::Victim: return "victim";
        case CoordSelector::Throw: return "throw";
        case CoordSelector::Land: return "land";
    }
    return "?";
}

CoordSelector coord_selector_from_name(std::string_view name) {
    for (const CoordSelector c :
         {CoordSelector::Actor, CoordSelector::Victim, CoordSelector::Throw, CoordSelector::Land})
        if (name == coord_selector_name(c)) return c;
    throw UnknownActionType("unknown coordinate selector '" + std::string(name) + "'");
}

namespace {

// Collects the selected coordinate of every matching action, validating the
// action/selector pairing once up front.
std::vector<Vec3> selected_points(std::span<const DemoDocument> docs, ActionType action,
                                  CoordSelector coord) {
    const auto reject = [&] {
        throw UnknownActionType(std::string("selector '") +
                                std::string(coord_selector_name(coord)) +
                                "' does not apply to action '" +
                                std::string(action_type_name(action)) + "'");
    };
    switch (action) {
        case ActionType::Damage:
        case ActionType::Kill:
            if (coord != CoordSelector::Actor && coord != CoordSelector::Victim) reject();
            break;
        case ActionType::Grenade:
            if (coord != CoordSelector::Throw && coord != CoordSelector::Land) reject();
            break;
        case ActionType::WeaponFire:
        case ActionType::BombEvent:
            if (coord != CoordSelector::Actor) reject();
            break;
        case ActionType::Flash:
            reject();  // flash events carry no coordinates
    }

    std::vector<Vec3> points;
    for (const DemoDocument& doc : docs)
        for (const GameRound& round : doc.game_rounds) {
            switch (action) {
                case ActionType::Damage:
                    for (const GameEvent& ev : round.damages) {
                        const auto& d = std::get<DamageEvent>(ev.body);
                        points.push_back(coord == CoordSelector::Actor ? d.attacker_pos
                                                                       : d.victim_pos);
                    }
                    break;
                case ActionType::Kill:
                    for (const GameEvent& ev : round.kills) {
                        const auto& k = std::get<KillEvent>(ev.body);
                        points.push_back(coord == CoordSelector::Actor ? k.attacker_pos
                                                                       : k.victim_pos);
                    }
                    break;
                case ActionType::Grenade:
                    for (const GameEvent& ev : round.grenades) {
                        const auto& g = std::get<GrenadeThrowEvent>(ev.body);
                        points.push_back(coord == CoordSelector::Throw ? g.throw_pos : g.land_pos);
                    }
                    break;
                case ActionType::WeaponFire:
                    for (const GameEvent& ev : round.weapon_fires)
                        points.push_back(std::get<WeaponFireEvent>(ev.body).pos);
                    break;
                case ActionType::BombEvent:
                    for (const GameEvent& ev : round.bomb_events)
                        if (const auto* plant = std::get_if<BombPlantEvent>(&ev.body))
                            points.push_back(plant->pos);
                    break;
                case ActionType::Flash:
                    break;  // unreachable, rejected above
            }
        }
    return points;
}

}  // namespace

long long HeatmapGrid::total() const {
    long long sum = 0;
    for (const long long c : counts) sum += c;
    return sum;
}

HeatmapGrid action_heatmap(std::span<const DemoDocument> docs, ActionType action,
                           CoordSelector coord, const GridSpec& spec) {
    if (spec.nx < 1 || spec.ny < 1 || spec.xmax <= spec.xmin || spec.ymax <= spec.ymin)
        throw Error("heatmap grid must have positive resolution and non-empty bounds");

    HeatmapGrid grid;
    grid.spec = spec;
    grid.counts.assign(static_cast<std::size_t>(spec.nx) * spec.ny, 0);

    const double x_span = spec.xmax - spec.xmin;
    const double y_span = spec.ymax - spec.ymin;
    for (const Vec3& p : selected_points(docs, action, coord)) {
        if (p.x < spec.xmin || p.x > spec.xmax || p.y < spec.ymin || p.y > spec.ymax) {
            grid.out_of_bounds += 1;
            continue;
        }
        const int ix = std::min(spec.nx - 1, static_cast<int>((p.x - spec.xmin) / x_span * spec.nx));
        const int iy = std::min(spec.ny - 1, static_cast<int>((p.y - spec.ymin) / y_span * spec.ny));
        grid.counts[static_cast<std::size_t>(iy) * spec.nx + ix] += 1;
    }
    return grid;
}

GridSpec fit_bounds(std::span<const DemoDocument> docs, ActionType action, CoordSelector coord,
                    int nx, int ny) {
    GridSpec spec;
    spec.nx = nx;
    spec.ny = ny;
    const std::vector<Vec3> points = selected_points(docs, action, coord);
    if (points.empty()) return spec;

    spec.xmin = spec.xmax = points.front().x;
    spec.ymin = spec.ymax = points.front().y;
    for (const Vec3& p : points) {
        spec.xmin = std::min(spec.xmin, static_cast<double>(p.x));
        spec.xmax = std::max(spec.xmax, static_cast<double>(p.x));
        spec.ymin = std::min(spec.ymin, static_cast<double>(p.y));
        spec.ymax = std::max(spec.ymax, static_cast<double>(p.y));
    }
    // degenerate spans still need a non-empty box
    if (spec.xmax <= spec.xmin) spec.xmax = spec.xmin + 1.0;
    if (spec.ymax <= spec.ymin) spec.ymax = spec.ymin + 1.0;
    return spec;
}

}  // namespace demoforge
