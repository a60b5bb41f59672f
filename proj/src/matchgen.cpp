#include "demoforge/matchgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "demoforge/rng.hpp"

namespace demoforge {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr Tick kNoDeath = std::numeric_limits<Tick>::max();

const char* const kCallsigns[10] = {"alpha",   "bravo", "charlie", "delta", "echo",
                                    "foxtrot", "golf",  "hotel",   "india", "juliett"};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Knuth's product-of-uniforms draw; lambdas here stay far above the double
// underflow limit.
int poisson(Rng& rng, double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform01();
    } while (p > limit);
    return k - 1;
}

struct PlannedAction {
    enum class Op { PhaseDefault, Damage, Kill, FlashThrow, Throw, Fire, Plant, Defuse, Finish };
    Tick tick = 0;
    Op op = Op::Fire;
    std::uint8_t actor = 0;
    std::uint8_t target = 0;
    int amount = 0;
    bool headshot = false;
    GrenadeType grenade = GrenadeType::HE;
    double flash_secs = 0.0;
};

struct RoundPlan {
    int round_num = 0;
    Side winner = Side::CT;
    RoundEndReason reason = RoundEndReason::EliminationOfT;
    Tick start = 0;
    Tick freeze_end = 0;
    Tick end = 0;
    Tick official_end = 0;
    std::optional<Tick> plant_tick;
    std::uint8_t planter = 0;
    std::uint8_t defuser = 0;
    std::uint8_t initial_carrier = 0;
    std::array<Tick, 11> death_tick{};  // index by player id, kNoDeath = survives
    std::vector<PlannedAction> actions;  // sorted by tick, causal order within a tick
    std::vector<std::pair<Tick, std::uint8_t>> carrier_transfers;
};

// Per-round static loadout for one player.
struct Loadout {
    int eq_val = 0;
    int money = 0;
    int armor = 0;
    bool helmet = false;
    bool defuse_kit = false;
    std::uint8_t weapon = 3;
    int ping = 30;
    int grenades = 0;
};

struct Walker {
    Vec3 pos;
    double heading_deg = 0.0;
    double speed = 0.0;  // map units per second
    double pitch = 0.0;
};

class MatchBuilder {
  public:
    explicit MatchBuilder(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    GeneratedMatch build() {
        GeneratedMatch out;
        out.header.version = 1;
        out.header.tick_rate = cfg_.tick_rate;
        out.header.map_name = cfg_.map_name;
        out.header.vars = cfg_.vars;
        for (int i = 0; i < 10; ++i)
            out.header.players.push_back(
                {static_cast<std::uint8_t>(i + 1), kCallsigns[i], i < 5 ? Side::CT : Side::T});
        roster_ = out.header.players;

        out.events.push_back({0, MatchStartEvent{}});
        Tick next_start = cfg_.tick_rate;

        const int clinch = cfg_.vars.max_regulation_rounds / 2 + 1;
        int ct = 0, t = 0;
        int round_num = 0;
        for (;;) {
            if (cfg_.rounds > 0) {
                if (round_num >= cfg_.rounds) break;
            } else if (ct >= clinch || t >= clinch ||
                       round_num >= cfg_.vars.max_regulation_rounds) {
                break;
            }
            ++round_num;

            RoundTruth truth;
            truth.round_num = round_num;
            RoundPlan plan = plan_round(round_num, next_start, ct, t, truth);
            emit_round(plan, truth, out.events, out.truth);
            (plan.winner == Side::CT ? ct : t) += 1;
            truth.ct_score = ct;
            truth.t_score = t;
            out.truth.rounds.push_back(truth);
            next_start = plan.official_end + 1;
        }
        out.truth.final_ct_score = ct;
        out.truth.final_t_score = t;
        return out;
    }

  private:
    Side side_of(std::uint8_t id, int round_num) const {
        const PlayerInfo& p = roster_[id - 1];
        return round_num > cfg_.vars.side_switch_after ? opposite(p.start_side) : p.start_side;
    }

    std::vector<std::uint8_t> team_ids(Side side, int round_num) const {
        std::vector<std::uint8_t> ids;
        for (const PlayerInfo& p : roster_)
            if (side_of(p.id, round_num) == side) ids.push_back(p.id);
        return ids;
    }

    RoundPlan plan_round(int round_num, Tick start, int ct_score, int t_score, RoundTruth& truth) {
        const ServerVars& vars = cfg_.vars;
        const Tick tr = cfg_.tick_rate;
        RoundPlan plan;
        plan.round_num = round_num;
        plan.start = start;
        plan.freeze_end = start + static_cast<Tick>(vars.freeze_time_secs) * tr;
        plan.death_tick.fill(kNoDeath);

        // Loadouts first: the equipment gap feeds the win logit.
        int ct_eq = 0, t_eq = 0;
        const bool pistol_round =
            round_num == 1 || round_num == cfg_.vars.side_switch_after + 1;
        for (const PlayerInfo& p : roster_) {
            Loadout& l = loadout_[p.id];
            l.eq_val = static_cast<int>(rng_.uniform_int(1000, 6000));
            l.money = static_cast<int>(rng_.uniform_int(0, 10000));
            const std::size_t armor_pick = rng_.categorical({0.2, 0.3, 0.5});
            l.armor = armor_pick == 0 ? 0 : armor_pick == 1 ? 50 : 100;
            l.helmet = l.armor > 0 && rng_.bernoulli(0.8);
            l.defuse_kit = side_of(p.id, round_num) == Side::CT && rng_.bernoulli(0.4);
            l.weapon = pistol_round
                           ? 1
                           : static_cast<std::uint8_t>(
                                 std::array<int, 4>{3, 2, 4, 5}[rng_.categorical(
                                     {0.6, 0.2, 0.1, 0.1})]);
            l.ping = static_cast<int>(rng_.uniform_int(5, 80));
            l.grenades = static_cast<int>(rng_.uniform_int(2, 4));
            (side_of(p.id, round_num) == Side::CT ? ct_eq : t_eq) += l.eq_val;
        }
        truth.ct_start_eq_val = ct_eq;
        truth.t_start_eq_val = t_eq;

        // Winner draw, steered away from an early clinch in fixed-length mode.
        const double logit = 2.0 * cfg_.skill_gap + static_cast<double>(ct_eq - t_eq) / 2000.0;
        plan.winner = rng_.bernoulli(sigmoid(logit)) ? Side::CT : Side::T;
        if (cfg_.rounds > 0 && round_num < cfg_.rounds) {
            const int clinch = vars.max_regulation_rounds / 2 + 1;
            if (ct_score + 1 >= clinch) plan.winner = Side::T;
            else if (t_score + 1 >= clinch) plan.winner = Side::CT;
        }
        if (plan.winner == Side::CT) {
            const std::size_t pick = rng_.categorical({0.685, 0.222, 0.093});
            plan.reason = pick == 0   ? RoundEndReason::EliminationOfT
                          : pick == 1 ? RoundEndReason::BombDefused
                                      : RoundEndReason::TargetSaved;
        } else {
            plan.reason = rng_.categorical({0.587, 0.413}) == 0
                              ? RoundEndReason::EliminationOfCT
                              : RoundEndReason::BombExploded;
        }
        truth.winner = plan.winner;
        truth.reason = plan.reason;

        // Timing skeleton per end reason.
        const Tick active = static_cast<Tick>(vars.round_time_secs) * tr;
        const Tick bomb_full = static_cast<Tick>(vars.bomb_timer_secs) * tr;
        bool planted = false;
        switch (plan.reason) {
            case RoundEndReason::TargetSaved:
                plan.end = plan.freeze_end + active;
                break;
            case RoundEndReason::EliminationOfT:
                plan.end = plan.freeze_end + std::llround(rng_.uniform(0.25, 0.90) * active);
                break;
            case RoundEndReason::EliminationOfCT:
                if (rng_.bernoulli(0.10)) {
                    planted = true;
                    plan.plant_tick =
                        plan.freeze_end + std::llround(rng_.uniform(0.20, 0.60) * active);
                    plan.end = *plan.plant_tick +
                               std::llround(rng_.uniform(0.20, 0.80) * bomb_full);
                } else {
                    plan.end = plan.freeze_end + std::llround(rng_.uniform(0.25, 0.90) * active);
                }
                break;
            case RoundEndReason::BombDefused:
                planted = true;
                plan.plant_tick =
                    plan.freeze_end + std::llround(rng_.uniform(0.20, 0.70) * active);
                plan.end =
                    *plan.plant_tick + std::llround(rng_.uniform(0.30, 0.85) * bomb_full);
                break;
            case RoundEndReason::BombExploded:
                planted = true;
                plan.plant_tick =
                    plan.freeze_end + std::llround(rng_.uniform(0.20, 0.70) * active);
                plan.end = *plan.plant_tick + bomb_full;
                break;
        }
        plan.official_end = plan.end + static_cast<Tick>(vars.round_end_secs) * tr;
        truth.bomb_planted = planted;

        // Death script. The losing side is wiped for elimination reasons;
        // otherwise both sides keep survivors.
        const Side loser = opposite(plan.winner);
        const bool elimination = plan.reason == RoundEndReason::EliminationOfT ||
                                 plan.reason == RoundEndReason::EliminationOfCT;
        std::vector<std::uint8_t> loser_ids = team_ids(loser, round_num);
        std::vector<std::uint8_t> winner_ids = team_ids(plan.winner, round_num);
        rng_.shuffle(loser_ids);
        rng_.shuffle(winner_ids);
        const int loser_deaths =
            elimination ? 5 : static_cast<int>(rng_.uniform_int(1, 4));
        const int winner_deaths = static_cast<int>(rng_.uniform_int(0, 3));

        const Tick combat_from = plan.freeze_end + std::max<Tick>(1, active / 20);
        std::vector<DeathRef> deaths;
        for (int i = 0; i < loser_deaths; ++i) {
            Tick t = elimination && i == loser_deaths - 1
                         ? plan.end
                         : static_cast<Tick>(
                               rng_.uniform_int(combat_from, std::max(combat_from, plan.end - 1)));
            deaths.push_back({t, loser_ids[i]});
        }
        for (int i = 0; i < winner_deaths; ++i)
            deaths.push_back({static_cast<Tick>(rng_.uniform_int(
                                  combat_from, std::max(combat_from, plan.end - 1))),
                              winner_ids[i]});
        std::stable_sort(deaths.begin(), deaths.end(),
                         [](const DeathRef& a, const DeathRef& b) { return a.tick < b.tick; });
        for (const DeathRef& d : deaths) plan.death_tick[d.victim] = d.tick;

        // Bomb logistics. The planter carries from the start of planted
        // rounds so the hand-off never races a death.
        std::vector<std::uint8_t> t_ids = team_ids(Side::T, round_num);
        if (planted) {
            std::vector<std::uint8_t> alive_at_plant;
            for (std::uint8_t id : t_ids)
                if (plan.death_tick[id] == kNoDeath || plan.death_tick[id] > *plan.plant_tick)
                    alive_at_plant.push_back(id);
            plan.planter = alive_at_plant[static_cast<std::size_t>(
                rng_.uniform_int(0, static_cast<std::int64_t>(alive_at_plant.size()) - 1))];
            plan.initial_carrier = plan.planter;
        } else {
            plan.initial_carrier = t_ids[static_cast<std::size_t>(rng_.uniform_int(0, 4))];
            // Dead carriers drop the bomb; a surviving teammate picks it up.
            std::uint8_t carrier = plan.initial_carrier;
            while (plan.death_tick[carrier] != kNoDeath && plan.death_tick[carrier] < plan.end) {
                const Tick when = plan.death_tick[carrier] + 1;
                std::vector<std::uint8_t> takers;
                for (std::uint8_t id : t_ids)
                    if (plan.death_tick[id] == kNoDeath || plan.death_tick[id] > when)
                        takers.push_back(id);
                if (takers.empty()) break;
                carrier = takers[static_cast<std::size_t>(
                    rng_.uniform_int(0, static_cast<std::int64_t>(takers.size()) - 1))];
                plan.carrier_transfers.push_back({when, carrier});
            }
        }
        if (plan.reason == RoundEndReason::BombDefused) {
            std::vector<std::uint8_t> ct_alive_end;
            for (std::uint8_t id : team_ids(Side::CT, round_num))
                if (plan.death_tick[id] == kNoDeath) ct_alive_end.push_back(id);
            plan.defuser = ct_alive_end[static_cast<std::size_t>(
                rng_.uniform_int(0, static_cast<std::int64_t>(ct_alive_end.size()) - 1))];
        }

        build_action_list(plan, deaths, round_num);
        return plan;
    }

    // Returns a player of `side` alive at tick t (death strictly later), or 0.
    std::uint8_t pick_alive(const RoundPlan& plan, Side side, int round_num, Tick t) {
        std::vector<std::uint8_t> pool;
        for (const PlayerInfo& p : roster_)
            if (side_of(p.id, round_num) == side &&
                (plan.death_tick[p.id] == kNoDeath || plan.death_tick[p.id] > t))
                pool.push_back(p.id);
        if (pool.empty()) return 0;
        return pool[static_cast<std::size_t>(
            rng_.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    }

    struct DeathRef {
        Tick tick;
        std::uint8_t victim;
    };

    void build_action_list(RoundPlan& plan, const std::vector<DeathRef>& deaths, int round_num) {
        std::vector<PlannedAction> acts;
        acts.push_back({.tick = plan.freeze_end, .op = PlannedAction::Op::PhaseDefault});

        // Combat: non-lethal damage sprinkled through the round, a lethal
        // damage event paired with every kill, hp tracked so totals add up.
        const double active_secs =
            static_cast<double>(plan.end - plan.freeze_end) / cfg_.tick_rate;
        std::array<int, 11> hp;
        hp.fill(100);
        struct CombatItem {
            Tick tick;
            bool is_kill;
            std::uint8_t victim;  // kills only
        };
        std::vector<CombatItem> combat;
        for (const DeathRef& d : deaths) combat.push_back({d.tick, true, d.victim});
        const int extra_damages = poisson(rng_, cfg_.intensities.damage * active_secs);
        for (int i = 0; i < extra_damages; ++i)
            combat.push_back({static_cast<Tick>(rng_.uniform_int(plan.freeze_end + 1, plan.end)),
                              false, 0});
        std::stable_sort(combat.begin(), combat.end(), [](const CombatItem& a, const CombatItem& b) {
            if (a.tick != b.tick) return a.tick < b.tick;
            return a.is_kill < b.is_kill;  // damage ticks resolve before a same-tick kill
        });
        for (const CombatItem& item : combat) {
            if (item.is_kill) {
                const Side victim_side = side_of(item.victim, round_num);
                const std::uint8_t killer =
                    pick_alive(plan, opposite(victim_side), round_num, item.tick);
                acts.push_back({.tick = item.tick,
                                .op = PlannedAction::Op::Damage,
                                .actor = killer,
                                .target = item.victim,
                                .amount = hp[item.victim]});
                acts.push_back({.tick = item.tick,
                                .op = PlannedAction::Op::Kill,
                                .actor = killer,
                                .target = item.victim,
                                .headshot = rng_.bernoulli(0.3)});
                hp[item.victim] = 0;
            } else {
                // Victim: anyone alive at this tick who can absorb a hit.
                std::vector<std::uint8_t> pool;
                for (const PlayerInfo& p : roster_)
                    if ((plan.death_tick[p.id] == kNoDeath || plan.death_tick[p.id] > item.tick) &&
                        hp[p.id] >= 6)
                        pool.push_back(p.id);
                if (pool.empty()) continue;
                const std::uint8_t victim = pool[static_cast<std::size_t>(
                    rng_.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
                const std::uint8_t attacker =
                    pick_alive(plan, opposite(side_of(victim, round_num)), round_num, item.tick);
                if (attacker == 0) continue;
                const int amount = static_cast<int>(
                    rng_.uniform_int(5, std::min<std::int64_t>(30, hp[victim] - 1)));
                hp[victim] -= amount;
                acts.push_back({.tick = item.tick,
                                .op = PlannedAction::Op::Damage,
                                .actor = attacker,
                                .target = victim,
                                .amount = amount});
            }
        }

        // Rate-driven actions. Throwers and shooters are drawn among the
        // living, so intensity draws are never discarded.
        const int flash_count = poisson(rng_, cfg_.intensities.flash * active_secs);
        for (int i = 0; i < flash_count; ++i) {
            const Tick t = rng_.uniform_int(plan.freeze_end + 1, std::max(plan.freeze_end + 1, plan.end - 1));
            const std::uint8_t thrower =
                pick_alive(plan, rng_.bernoulli(0.5) ? Side::CT : Side::T, round_num, t);
            const std::uint8_t actual = thrower ? thrower : pick_alive(plan, Side::CT, round_num, t);
            if (!actual) continue;
            const std::uint8_t victim =
                pick_alive(plan, opposite(side_of(actual, round_num)), round_num, t);
            if (!victim) continue;
            acts.push_back({.tick = t,
                            .op = PlannedAction::Op::FlashThrow,
                            .actor = actual,
                            .target = victim,
                            .flash_secs = rng_.uniform(0.3, 3.2)});
        }
        const int throw_count = poisson(rng_, cfg_.intensities.grenade * active_secs);
        for (int i = 0; i < throw_count; ++i) {
            const Tick t = rng_.uniform_int(plan.freeze_end + 1, std::max(plan.freeze_end + 1, plan.end - 1));
            const std::uint8_t thrower =
                pick_alive(plan, rng_.bernoulli(0.5) ? Side::CT : Side::T, round_num, t);
            const std::uint8_t actual = thrower ? thrower : pick_alive(plan, Side::CT, round_num, t);
            if (!actual) continue;
            static const GrenadeType kTypes[4] = {GrenadeType::HE, GrenadeType::Smoke,
                                                  GrenadeType::Molotov, GrenadeType::Decoy};
            acts.push_back({.tick = t,
                            .op = PlannedAction::Op::Throw,
                            .actor = actual,
                            .grenade = kTypes[rng_.categorical({0.35, 0.35, 0.2, 0.1})]});
        }
        const int fire_count = poisson(rng_, cfg_.intensities.weapon_fire * active_secs);
        for (int i = 0; i < fire_count; ++i) {
            const Tick t = rng_.uniform_int(plan.freeze_end + 1, plan.end);
            const std::uint8_t shooter =
                pick_alive(plan, rng_.bernoulli(0.5) ? Side::CT : Side::T, round_num, t);
            const std::uint8_t actual = shooter ? shooter : pick_alive(plan, Side::CT, round_num, t);
            if (!actual) continue;
            acts.push_back({.tick = t, .op = PlannedAction::Op::Fire, .actor = actual});
        }

        if (plan.plant_tick)
            acts.push_back(
                {.tick = *plan.plant_tick, .op = PlannedAction::Op::Plant, .actor = plan.planter});
        if (plan.reason == RoundEndReason::BombDefused)
            acts.push_back({.tick = plan.end, .op = PlannedAction::Op::Defuse, .actor = plan.defuser});
        acts.push_back({.tick = plan.end, .op = PlannedAction::Op::Finish});

        std::stable_sort(acts.begin(), acts.end(),
                         [](const PlannedAction& a, const PlannedAction& b) { return a.tick < b.tick; });
        plan.actions = std::move(acts);
    }

    void emit_round(const RoundPlan& plan, RoundTruth& truth, std::vector<GameEvent>& events,
                    GroundTruth& match_truth) {
        const Tick tr = cfg_.tick_rate;

        // Live state.
        std::array<Walker, 11> walk{};
        std::array<int, 11> hp{};
        std::array<Tick, 11> blind_until{};
        std::array<int, 11> grenades_left{};
        std::array<bool, 11> has_bomb{};
        bool planted = false;
        std::optional<BombSite> chosen_site;
        for (const PlayerInfo& p : roster_) {
            const Side side = side_of(p.id, plan.round_num);
            Walker& w = walk[p.id];
            const float base_x = side == Side::CT ? 2900.0f : 300.0f;
            w.pos = Vec3{base_x + static_cast<float>(rng_.uniform(-150.0, 150.0)),
                         1600.0f + static_cast<float>(rng_.uniform(-300.0, 300.0)), 0.0f};
            w.heading_deg = rng_.uniform(0.0, 360.0);
            w.speed = 0.0;
            w.pitch = 0.0;
            hp[p.id] = 100;
            blind_until[p.id] = -1;
            grenades_left[p.id] = loadout_[p.id].grenades;
            has_bomb[p.id] = p.id == plan.initial_carrier;
            match_truth.players[p.id].rounds_played += 1;
        }

        events.push_back({plan.start, RoundStartEvent{plan.round_num}});
        events.push_back({plan.start, PhaseChangeEvent{Phase::Freeze}});

        std::size_t next_action = 0;
        std::size_t next_transfer = 0;
        const float zone_radius_sq = 600.0f * 600.0f;
        for (Tick t = plan.start; t <= plan.official_end; ++t) {
            // Per-tick snapshots for all ten players, then this tick's actions.
            for (const PlayerInfo& p : roster_) {
                Walker& w = walk[p.id];
                const bool alive = hp[p.id] > 0;
                Vec3 vel{};
                if (alive && t > plan.freeze_end) {
                    w.heading_deg += rng_.normal(0.0, 10.0);
                    w.heading_deg = std::fmod(std::fmod(w.heading_deg, 360.0) + 360.0, 360.0);
                    w.speed = std::clamp(w.speed + rng_.normal(0.0, 6.0), 0.0,
                                         static_cast<double>(kMaxPlayerSpeed) * 0.95);
                    const double step = w.speed / tr;
                    double dx = std::cos(w.heading_deg * kPi / 180.0) * step;
                    double dy = std::sin(w.heading_deg * kPi / 180.0) * step;
                    double nx = w.pos.x + dx, ny = w.pos.y + dy;
                    if (nx < kMapMin || nx > kMapMax) {
                        nx = std::clamp(nx, static_cast<double>(kMapMin), static_cast<double>(kMapMax));
                        dx = nx - w.pos.x;
                        w.heading_deg = std::fmod(540.0 - w.heading_deg, 360.0);
                    }
                    if (ny < kMapMin || ny > kMapMax) {
                        ny = std::clamp(ny, static_cast<double>(kMapMin), static_cast<double>(kMapMax));
                        dy = ny - w.pos.y;
                        w.heading_deg = std::fmod(720.0 - w.heading_deg, 360.0);
                    }
                    w.pos.x = static_cast<float>(nx);
                    w.pos.y = static_cast<float>(ny);
                    vel = Vec3{static_cast<float>(dx * tr), static_cast<float>(dy * tr), 0.0f};
                    if (t % 16 == 0) w.pitch = std::clamp(rng_.normal(0.0, 8.0), -89.0, 89.0);
                }

                const Loadout& l = loadout_[p.id];
                PlayerState s;
                s.player_id = p.id;
                s.side = side_of(p.id, plan.round_num);
                s.pos = w.pos;
                s.vel = vel;
                s.view_yaw = static_cast<float>(w.heading_deg);
                if (s.view_yaw >= 360.0f) s.view_yaw = 0.0f;
                s.view_pitch = static_cast<float>(w.pitch);
                s.hp = static_cast<std::uint8_t>(hp[p.id]);
                s.armor = static_cast<std::uint8_t>(l.armor);
                s.money = static_cast<std::uint16_t>(l.money);
                s.eq_val = static_cast<std::uint16_t>(l.eq_val);
                s.active_weapon = l.weapon;
                s.ping = static_cast<std::uint16_t>(l.ping);
                s.alive = alive;
                s.blinded = alive && blind_until[p.id] >= t;
                const float da = dist2_sq(w.pos, kSiteAPos), db = dist2_sq(w.pos, kSiteBPos);
                s.in_bomb_zone = alive && (da < zone_radius_sq || db < zone_radius_sq);
                s.has_helmet = l.helmet;
                s.has_defuse_kit = l.defuse_kit;
                s.has_bomb = has_bomb[p.id];
                s.grenades_remaining = static_cast<std::uint8_t>(grenades_left[p.id]);
                events.push_back({t, PlayerUpdateEvent{s}});
            }

            while (next_transfer < plan.carrier_transfers.size() &&
                   plan.carrier_transfers[next_transfer].first <= t) {
                has_bomb.fill(false);
                if (!planted) has_bomb[plan.carrier_transfers[next_transfer].second] = true;
                ++next_transfer;
            }

            while (next_action < plan.actions.size() && plan.actions[next_action].tick <= t) {
                const PlannedAction& a = plan.actions[next_action++];
                switch (a.op) {
                    case PlannedAction::Op::PhaseDefault:
                        events.push_back({t, PhaseChangeEvent{Phase::Default}});
                        break;
                    case PlannedAction::Op::Damage: {
                        DamageEvent e;
                        e.attacker_id = a.actor;
                        e.victim_id = a.target;
                        e.attacker_pos = walk[a.actor].pos;
                        e.victim_pos = walk[a.target].pos;
                        e.hp_damage = static_cast<std::uint8_t>(a.amount);
                        e.weapon = loadout_[a.actor].weapon;
                        events.push_back({t, e});
                        hp[a.target] -= a.amount;
                        ++truth.damages;
                        match_truth.players[a.actor].damage += a.amount;
                        break;
                    }
                    case PlannedAction::Op::Kill: {
                        KillEvent e;
                        e.attacker_id = a.actor;
                        e.victim_id = a.target;
                        e.attacker_pos = walk[a.actor].pos;
                        e.victim_pos = walk[a.target].pos;
                        e.weapon = loadout_[a.actor].weapon;
                        e.headshot = a.headshot;
                        events.push_back({t, e});
                        hp[a.target] = 0;
                        if (has_bomb[a.target] && !planted) has_bomb[a.target] = false;
                        ++truth.kills;
                        match_truth.players[a.actor].kills += 1;
                        match_truth.players[a.target].deaths += 1;
                        if (a.headshot) match_truth.players[a.actor].headshots += 1;
                        break;
                    }
                    case PlannedAction::Op::FlashThrow: {
                        GrenadeThrowEvent g;
                        g.player_id = a.actor;
                        g.grenade_type = GrenadeType::Flashbang;
                        g.throw_pos = walk[a.actor].pos;
                        g.land_pos = scatter(walk[a.actor].pos);
                        events.push_back({t, g});
                        FlashEvent f;
                        f.attacker_id = a.actor;
                        f.victim_id = a.target;
                        f.flash_duration_secs = static_cast<float>(a.flash_secs);
                        events.push_back({t, f});
                        blind_until[a.target] = std::max<Tick>(
                            blind_until[a.target], t + std::llround(a.flash_secs * tr));
                        grenades_left[a.actor] = std::max(0, grenades_left[a.actor] - 1);
                        ++truth.grenades;
                        ++truth.flashes;
                        match_truth.players[a.actor].grenades_thrown += 1;
                        match_truth.players[a.actor].flashes_thrown += 1;
                        break;
                    }
                    case PlannedAction::Op::Throw: {
                        GrenadeThrowEvent g;
                        g.player_id = a.actor;
                        g.grenade_type = a.grenade;
                        g.throw_pos = walk[a.actor].pos;
                        g.land_pos = scatter(walk[a.actor].pos);
                        events.push_back({t, g});
                        grenades_left[a.actor] = std::max(0, grenades_left[a.actor] - 1);
                        ++truth.grenades;
                        match_truth.players[a.actor].grenades_thrown += 1;
                        break;
                    }
                    case PlannedAction::Op::Fire: {
                        WeaponFireEvent e;
                        e.player_id = a.actor;
                        e.pos = walk[a.actor].pos;
                        e.weapon = loadout_[a.actor].weapon;
                        events.push_back({t, e});
                        ++truth.weapon_fires;
                        break;
                    }
                    case PlannedAction::Op::Plant: {
                        BombPlantEvent e;
                        e.player_id = a.actor;
                        e.pos = walk[a.actor].pos;
                        e.site = dist2_sq(e.pos, kSiteAPos) <= dist2_sq(e.pos, kSiteBPos)
                                     ? BombSite::A
                                     : BombSite::B;
                        chosen_site = e.site;
                        events.push_back({t, e});
                        events.push_back({t, PhaseChangeEvent{Phase::BombPlanted}});
                        planted = true;
                        has_bomb.fill(false);
                        ++truth.bomb_events;
                        match_truth.players[a.actor].bomb_plants += 1;
                        break;
                    }
                    case PlannedAction::Op::Defuse: {
                        events.push_back({t, BombDefuseEvent{a.actor}});
                        ++truth.bomb_events;
                        match_truth.players[a.actor].bomb_defuses += 1;
                        break;
                    }
                    case PlannedAction::Op::Finish: {
                        if (plan.reason == RoundEndReason::BombExploded) {
                            events.push_back({t, BombExplodeEvent{}});
                            ++truth.bomb_events;
                        }
                        events.push_back({t, PhaseChangeEvent{Phase::RoundEnd}});
                        events.push_back({t, RoundEndEvent{plan.winner, plan.reason}});
                        break;
                    }
                }
            }
        }
        (void)chosen_site;
    }

    static float dist2_sq(const Vec3& a, const Vec3& b) {
        const float dx = a.x - b.x, dy = a.y - b.y;
        return dx * dx + dy * dy;
    }

    Vec3 scatter(const Vec3& from) {
        return Vec3{
            std::clamp(from.x + static_cast<float>(rng_.uniform(-400.0, 400.0)), kMapMin, kMapMax),
            std::clamp(from.y + static_cast<float>(rng_.uniform(-400.0, 400.0)), kMapMin, kMapMax),
            0.0f};
    }

    const GenConfig& cfg_;
    Rng rng_;
    std::vector<PlayerInfo> roster_;
    std::array<Loadout, 11> loadout_{};
};

void validate_config(const GenConfig& cfg) {
    const auto bad = [](const std::string& msg) { throw InvalidConfig(msg); };
    if (cfg.tick_rate < 1 || cfg.tick_rate > 0xFFFF) bad("tickRate out of range");
    if (cfg.rounds < 0 || cfg.rounds > cfg.vars.max_regulation_rounds)
        bad("rounds must be 0 (clinch mode) or 1..maxRegulationRounds");
    if (cfg.skill_gap < -1.0 || cfg.skill_gap > 1.0) bad("skillGap outside [-1,1]");
    if (cfg.intensities.weapon_fire < 0 || cfg.intensities.damage < 0 ||
        cfg.intensities.grenade < 0 || cfg.intensities.flash < 0)
        bad("event intensities must be non-negative");
    if (cfg.map_name.empty() || cfg.map_name.size() > 255) bad("bad mapName");
    const ServerVars& v = cfg.vars;
    if (v.freeze_time_secs < 1 || v.round_time_secs < 1 || v.bomb_timer_secs < 1 ||
        v.round_end_secs < 1 || v.side_switch_after < 1)
        bad("server vars must be positive");
    if (v.max_regulation_rounds != 2 * v.side_switch_after)
        bad("maxRegulationRounds must be twice sideSwitchAfter");
}

}  // namespace

GeneratedMatch generate_match(const GenConfig& config) {
    validate_config(config);
    return MatchBuilder(config).build();
}

std::string_view anomaly_kind_name(AnomalyKind kind) {
    switch (kind) {
        case AnomalyKind::Restart: return "restart";
        case AnomalyKind::DuplicateRoundEnd: return "duplicateRoundEnd";
        case AnomalyKind::Truncation: return "truncation";
    }
    return "?";
}

AnomalyKind anomaly_kind_from_name(std::string_view name) {
    if (name == "restart") return AnomalyKind::Restart;
    if (name == "duplicateRoundEnd") return AnomalyKind::DuplicateRoundEnd;
    if (name == "truncation") return AnomalyKind::Truncation;
    throw UnsupportedKind("unknown anomaly kind: " + std::string(name));
}

namespace {

PlayerState junk_player_state(std::uint8_t id, Side side, Rng& rng) {
    PlayerState s;
    s.player_id = id;
    s.side = side;
    s.pos = Vec3{static_cast<float>(rng.uniform(0.0, kMapMax)),
                 static_cast<float>(rng.uniform(0.0, kMapMax)), 0.0f};
    s.view_yaw = static_cast<float>(rng.uniform(0.0, 359.0));
    s.hp = 100;
    s.alive = true;
    return s;
}

}  // namespace

std::vector<GameEvent> inject_anomalies(std::vector<GameEvent> events, AnomalyKind kind,
                                        std::uint64_t seed) {
    Rng rng(seed);
    switch (kind) {
        case AnomalyKind::Restart: {
            // Warmup junk, a restart marker, then the original stream pushed
            // later in time. Only the original MatchStart survives cleaning.
            std::vector<GameEvent> out;
            const int junk_rounds = static_cast<int>(rng.uniform_int(1, 2));
            Tick t = 1;
            out.push_back({t, MatchStartEvent{}});
            for (int j = 0; j < junk_rounds; ++j) {
                out.push_back({++t, RoundStartEvent{j + 1}});
                out.push_back({t, PhaseChangeEvent{Phase::Freeze}});
                for (int u = 0; u < 4; ++u) {
                    ++t;
                    out.push_back({t, PlayerUpdateEvent{junk_player_state(
                                          static_cast<std::uint8_t>(1 + u), Side::CT, rng)}});
                }
                out.push_back({++t, RoundEndEvent{Side::T, RoundEndReason::EliminationOfCT}});
            }
            out.push_back({++t, RestartMarkerEvent{}});
            const Tick shift = t + static_cast<Tick>(rng.uniform_int(1, 500));
            for (GameEvent ev : events) {
                ev.tick += shift;
                out.push_back(std::move(ev));
            }
            return out;
        }
        case AnomalyKind::DuplicateRoundEnd: {
            // Re-emit one round's RoundEnd immediately after the original.
            std::vector<std::size_t> ends;
            for (std::size_t i = 0; i < events.size(); ++i)
                if (event_is<RoundEndEvent>(events[i])) ends.push_back(i);
            if (ends.empty()) return events;
            const std::size_t pick = ends[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(ends.size()) - 1))];
            events.insert(events.begin() + static_cast<std::ptrdiff_t>(pick) + 1, events[pick]);
            return events;
        }
        case AnomalyKind::Truncation: {
            // A fresh round that never ends: started, then cut off mid-play.
            Tick t = events.empty() ? 0 : events.back().tick;
            int next_round = 1;
            for (const GameEvent& ev : events)
                if (const auto* rs = std::get_if<RoundStartEvent>(&ev.body))
                    next_round = rs->round_num + 1;
            t += static_cast<Tick>(rng.uniform_int(2, 100));
            events.push_back({t, RoundStartEvent{next_round}});
            events.push_back({t, PhaseChangeEvent{Phase::Freeze}});
            const int updates = static_cast<int>(rng.uniform_int(5, 40));
            for (int u = 0; u < updates; ++u) {
                ++t;
                const std::uint8_t id = static_cast<std::uint8_t>(rng.uniform_int(1, 10));
                events.push_back({t, PlayerUpdateEvent{junk_player_state(
                                        id, id <= 5 ? Side::CT : Side::T, rng)}});
            }
            return events;
        }
    }
    throw UnsupportedKind("unhandled anomaly kind");
}

}  // namespace demoforge
