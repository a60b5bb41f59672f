#include "demoforge/json_io.hpp"

#include <cstdio>
#include <utility>

#include "demoforge/fsutil.hpp"
#include "json.hpp"

namespace demoforge {
namespace {

using ojson = nlohmann::ordered_json;

// --- emit helpers -----------------------------------------------------------

ojson to_json(const Vec3& v) {
    return ojson{{"x", v.x}, {"y", v.y}, {"z", v.z}};
}

template <typename T>
ojson opt(const std::optional<T>& o) {
    return o ? ojson(*o) : ojson(nullptr);
}

ojson to_json(const PlayerState& p) {
    ojson j;
    j["playerId"] = p.player_id;
    j["side"] = side_name(p.side);
    j["pos"] = to_json(p.pos);
    j["vel"] = to_json(p.vel);
    j["viewYaw"] = p.view_yaw;
    j["viewPitch"] = p.view_pitch;
    j["hp"] = p.hp;
    j["armor"] = p.armor;
    j["money"] = p.money;
    j["eqVal"] = p.eq_val;
    j["activeWeapon"] = weapon_name(p.active_weapon);
    j["ping"] = p.ping;
    j["alive"] = p.alive;
    j["blinded"] = p.blinded;
    j["inBombZone"] = p.in_bomb_zone;
    j["hasHelmet"] = p.has_helmet;
    j["hasDefuseKit"] = p.has_defuse_kit;
    j["hasBomb"] = p.has_bomb;
    j["grenadesRemaining"] = p.grenades_remaining;
    return j;
}

ojson to_json(const TeamState& t) {
    ojson j;
    j["side"] = side_name(t.side);
    j["players"] = ojson::array();
    for (const PlayerState& p : t.players) j["players"].push_back(to_json(p));
    j["aliveCount"] = t.alive_count;
    j["totalHp"] = t.total_hp;
    j["totalArmor"] = t.total_armor;
    j["totalEqVal"] = t.total_eq_val;
    j["helmets"] = t.helmets;
    j["defuseKits"] = t.defuse_kits;
    j["grenades"] = t.grenades;
    j["playersInBombZone"] = t.players_in_bomb_zone;
    return j;
}

ojson to_json(const AreaEffect& e) {
    return ojson{{"pos", to_json(e.pos)}, {"expiryTick", e.expiry_tick}};
}

ojson to_json(const Frame& f) {
    ojson j;
    j["tick"] = f.tick;
    j["clockSecs"] = f.clock_secs;
    j["phase"] = phase_name(f.phase);
    ojson bomb;
    bomb["carrierId"] = opt(f.bomb.carrier_id);
    bomb["plantedSite"] =
        f.bomb.planted_site ? ojson(site_name(*f.bomb.planted_site)) : ojson(nullptr);
    bomb["plantTick"] = opt(f.bomb.plant_tick);
    bomb["pos"] = f.bomb.pos ? to_json(*f.bomb.pos) : ojson(nullptr);
    j["bomb"] = std::move(bomb);
    j["fires"] = ojson::array();
    for (const AreaEffect& e : f.fires) j["fires"].push_back(to_json(e));
    j["smokes"] = ojson::array();
    for (const AreaEffect& e : f.smokes) j["smokes"].push_back(to_json(e));
    j["ct"] = to_json(f.ct);
    j["t"] = to_json(f.t);
    return j;
}

// Every event row carries its tick followed by the body fields. Bomb events
// share one list and are discriminated by "kind".
ojson damage_json(Tick tick, const DamageEvent& e) {
    ojson j;
    j["tick"] = tick;
    j["attackerId"] = e.attacker_id;
    j["victimId"] = e.victim_id;
    j["attackerPos"] = to_json(e.attacker_pos);
    j["victimPos"] = to_json(e.victim_pos);
    j["hpDamage"] = e.hp_damage;
    j["weapon"] = weapon_name(e.weapon);
    return j;
}

ojson kill_json(Tick tick, const KillEvent& e) {
    ojson j;
    j["tick"] = tick;
    j["attackerId"] = e.attacker_id;
    j["victimId"] = e.victim_id;
    j["attackerPos"] = to_json(e.attacker_pos);
    j["victimPos"] = to_json(e.victim_pos);
    j["weapon"] = weapon_name(e.weapon);
    j["headshot"] = e.headshot;
    return j;
}

ojson flash_json(Tick tick, const FlashEvent& e) {
    ojson j;
    j["tick"] = tick;
    j["attackerId"] = e.attacker_id;
    j["victimId"] = e.victim_id;
    j["flashDurationSecs"] = e.flash_duration_secs;
    return j;
}

ojson bomb_json(Tick tick, const EventBody& body) {
    ojson j;
    j["tick"] = tick;
    if (const auto* plant = std::get_if<BombPlantEvent>(&body)) {
        j["kind"] = "plant";
        j["playerId"] = plant->player_id;
        j["site"] = site_name(plant->site);
        j["pos"] = to_json(plant->pos);
    } else if (const auto* defuse = std::get_if<BombDefuseEvent>(&body)) {
        j["kind"] = "defuse";
        j["playerId"] = defuse->player_id;
    } else {
        j["kind"] = "explode";
    }
    return j;
}

ojson grenade_json(Tick tick, const GrenadeThrowEvent& e) {
    ojson j;
    j["tick"] = tick;
    j["playerId"] = e.player_id;
    j["grenadeType"] = grenade_name(e.grenade_type);
    j["throwPos"] = to_json(e.throw_pos);
    j["landPos"] = to_json(e.land_pos);
    return j;
}

ojson fire_json(Tick tick, const WeaponFireEvent& e) {
    ojson j;
    j["tick"] = tick;
    j["playerId"] = e.player_id;
    j["pos"] = to_json(e.pos);
    j["weapon"] = weapon_name(e.weapon);
    return j;
}

ojson to_json(const GameRound& r) {
    ojson j;
    j["roundNum"] = r.round_num;
    j["startTick"] = r.start_tick;
    j["freezeEndTick"] = r.freeze_end_tick;
    j["bombPlantTick"] = opt(r.bomb_plant_tick);
    j["endTick"] = r.end_tick;
    j["officialEndTick"] = r.official_end_tick;
    j["winner"] = side_name(r.winner);
    j["reason"] = reason_name(r.reason);
    j["ctScore"] = r.ct_score;
    j["tScore"] = r.t_score;
    j["ctStartEqVal"] = r.ct_start_eq_val;
    j["tStartEqVal"] = r.t_start_eq_val;
    j["damages"] = ojson::array();
    for (const GameEvent& e : r.damages)
        j["damages"].push_back(damage_json(e.tick, std::get<DamageEvent>(e.body)));
    j["kills"] = ojson::array();
    for (const GameEvent& e : r.kills)
        j["kills"].push_back(kill_json(e.tick, std::get<KillEvent>(e.body)));
    j["flashes"] = ojson::array();
    for (const GameEvent& e : r.flashes)
        j["flashes"].push_back(flash_json(e.tick, std::get<FlashEvent>(e.body)));
    j["bombEvents"] = ojson::array();
    for (const GameEvent& e : r.bomb_events) j["bombEvents"].push_back(bomb_json(e.tick, e.body));
    j["grenades"] = ojson::array();
    for (const GameEvent& e : r.grenades)
        j["grenades"].push_back(grenade_json(e.tick, std::get<GrenadeThrowEvent>(e.body)));
    j["weaponFires"] = ojson::array();
    for (const GameEvent& e : r.weapon_fires)
        j["weaponFires"].push_back(fire_json(e.tick, std::get<WeaponFireEvent>(e.body)));
    j["frames"] = ojson::array();
    for (const Frame& f : r.frames) j["frames"].push_back(to_json(f));
    j["invalidReasons"] = r.invalid_reasons;
    return j;
}

// --- parse helpers ----------------------------------------------------------

Vec3 vec_from(const ojson& j) {
    Vec3 v;
    v.x = static_cast<float>(j.at("x").get<double>());
    v.y = static_cast<float>(j.at("y").get<double>());
    v.z = static_cast<float>(j.at("z").get<double>());
    return v;
}

template <typename T>
std::optional<T> opt_from(const ojson& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

Side side_from(const ojson& j) {
    auto s = side_from_name(j.get<std::string>());
    if (!s) throw BadDocument("unknown side: " + j.get<std::string>());
    return *s;
}

std::uint8_t weapon_from(const ojson& j) {
    auto w = weapon_from_name(j.get<std::string>());
    if (!w) throw BadDocument("unknown weapon: " + j.get<std::string>());
    return *w;
}

PlayerState player_from(const ojson& j) {
    PlayerState p;
    p.player_id = j.at("playerId").get<std::uint8_t>();
    p.side = side_from(j.at("side"));
    p.pos = vec_from(j.at("pos"));
    p.vel = vec_from(j.at("vel"));
    p.view_yaw = static_cast<float>(j.at("viewYaw").get<double>());
    p.view_pitch = static_cast<float>(j.at("viewPitch").get<double>());
    p.hp = j.at("hp").get<std::uint8_t>();
    p.armor = j.at("armor").get<std::uint8_t>();
    p.money = j.at("money").get<std::uint16_t>();
    p.eq_val = j.at("eqVal").get<std::uint16_t>();
    p.active_weapon = weapon_from(j.at("activeWeapon"));
    p.ping = j.at("ping").get<std::uint16_t>();
    p.alive = j.at("alive").get<bool>();
    p.blinded = j.at("blinded").get<bool>();
    p.in_bomb_zone = j.at("inBombZone").get<bool>();
    p.has_helmet = j.at("hasHelmet").get<bool>();
    p.has_defuse_kit = j.at("hasDefuseKit").get<bool>();
    p.has_bomb = j.at("hasBomb").get<bool>();
    p.grenades_remaining = j.at("grenadesRemaining").get<std::uint8_t>();
    return p;
}

TeamState team_from(const ojson& j) {
    TeamState t;
    t.side = side_from(j.at("side"));
    for (const ojson& p : j.at("players")) t.players.push_back(player_from(p));
    t.alive_count = j.at("aliveCount").get<int>();
    t.total_hp = j.at("totalHp").get<int>();
    t.total_armor = j.at("totalArmor").get<int>();
    t.total_eq_val = j.at("totalEqVal").get<int>();
    t.helmets = j.at("helmets").get<int>();
    t.defuse_kits = j.at("defuseKits").get<int>();
    t.grenades = j.at("grenades").get<int>();
    t.players_in_bomb_zone = j.at("playersInBombZone").get<int>();
    return t;
}

AreaEffect effect_from(const ojson& j) {
    AreaEffect e;
    e.pos = vec_from(j.at("pos"));
    e.expiry_tick = j.at("expiryTick").get<Tick>();
    return e;
}

Frame frame_from(const ojson& j) {
    Frame f;
    f.tick = j.at("tick").get<Tick>();
    f.clock_secs = j.at("clockSecs").get<double>();
    auto phase = phase_from_name(j.at("phase").get<std::string>());
    if (!phase) throw BadDocument("unknown phase: " + j.at("phase").get<std::string>());
    f.phase = *phase;
    const ojson& bomb = j.at("bomb");
    f.bomb.carrier_id = opt_from<std::uint8_t>(bomb.at("carrierId"));
    if (!bomb.at("plantedSite").is_null()) {
        auto site = site_from_name(bomb.at("plantedSite").get<std::string>());
        if (!site) throw BadDocument("unknown bomb site");
        f.bomb.planted_site = *site;
    }
    f.bomb.plant_tick = opt_from<Tick>(bomb.at("plantTick"));
    if (!bomb.at("pos").is_null()) f.bomb.pos = vec_from(bomb.at("pos"));
    for (const ojson& e : j.at("fires")) f.fires.push_back(effect_from(e));
    for (const ojson& e : j.at("smokes")) f.smokes.push_back(effect_from(e));
    f.ct = team_from(j.at("ct"));
    f.t = team_from(j.at("t"));
    return f;
}

GameEvent damage_from(const ojson& j) {
    DamageEvent e;
    e.attacker_id = j.at("attackerId").get<std::uint8_t>();
    e.victim_id = j.at("victimId").get<std::uint8_t>();
    e.attacker_pos = vec_from(j.at("attackerPos"));
    e.victim_pos = vec_from(j.at("victimPos"));
    e.hp_damage = j.at("hpDamage").get<std::uint8_t>();
    e.weapon = weapon_from(j.at("weapon"));
    return {j.at("tick").get<Tick>(), e};
}

GameEvent kill_from(const ojson& j) {
    KillEvent e;
    e.attacker_id = j.at("attackerId").get<std::uint8_t>();
    e.victim_id = j.at("victimId").get<std::uint8_t>();
    e.attacker_pos = vec_from(j.at("attackerPos"));
    e.victim_pos = vec_from(j.at("victimPos"));
    e.weapon = weapon_from(j.at("weapon"));
    e.headshot = j.at("headshot").get<bool>();
    return {j.at("tick").get<Tick>(), e};
}

GameEvent flash_from(const ojson& j) {
    FlashEvent e;
    e.attacker_id = j.at("attackerId").get<std::uint8_t>();
    e.victim_id = j.at("victimId").get<std::uint8_t>();
    e.flash_duration_secs = static_cast<float>(j.at("flashDurationSecs").get<double>());
    return {j.at("tick").get<Tick>(), e};
}

GameEvent bomb_from(const ojson& j) {
    const Tick tick = j.at("tick").get<Tick>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "plant") {
        BombPlantEvent e;
        e.player_id = j.at("playerId").get<std::uint8_t>();
        auto site = site_from_name(j.at("site").get<std::string>());
        if (!site) throw BadDocument("unknown bomb site");
        e.site = *site;
        e.pos = vec_from(j.at("pos"));
        return {tick, e};
    }
    if (kind == "defuse") {
        BombDefuseEvent e;
        e.player_id = j.at("playerId").get<std::uint8_t>();
        return {tick, e};
    }
    if (kind == "explode") return {tick, BombExplodeEvent{}};
    throw BadDocument("unknown bomb event kind: " + kind);
}

GameEvent grenade_from(const ojson& j) {
    GrenadeThrowEvent e;
    e.player_id = j.at("playerId").get<std::uint8_t>();
    auto g = grenade_from_name(j.at("grenadeType").get<std::string>());
    if (!g) throw BadDocument("unknown grenade type");
    e.grenade_type = *g;
    e.throw_pos = vec_from(j.at("throwPos"));
    e.land_pos = vec_from(j.at("landPos"));
    return {j.at("tick").get<Tick>(), e};
}

GameEvent fire_from(const ojson& j) {
    WeaponFireEvent e;
    e.player_id = j.at("playerId").get<std::uint8_t>();
    e.pos = vec_from(j.at("pos"));
    e.weapon = weapon_from(j.at("weapon"));
    return {j.at("tick").get<Tick>(), e};
}

GameRound round_from(const ojson& j) {
    GameRound r;
    r.round_num = j.at("roundNum").get<int>();
    r.start_tick = j.at("startTick").get<Tick>();
    r.freeze_end_tick = j.at("freezeEndTick").get<Tick>();
    r.bomb_plant_tick = opt_from<Tick>(j.at("bombPlantTick"));
    r.end_tick = j.at("endTick").get<Tick>();
    r.official_end_tick = j.at("officialEndTick").get<Tick>();
    r.winner = side_from(j.at("winner"));
    auto reason = reason_from_name(j.at("reason").get<std::string>());
    if (!reason) throw BadDocument("unknown end reason: " + j.at("reason").get<std::string>());
    r.reason = *reason;
    r.ct_score = j.at("ctScore").get<int>();
    r.t_score = j.at("tScore").get<int>();
    r.ct_start_eq_val = j.at("ctStartEqVal").get<int>();
    r.t_start_eq_val = j.at("tStartEqVal").get<int>();
    for (const ojson& e : j.at("damages")) r.damages.push_back(damage_from(e));
    for (const ojson& e : j.at("kills")) r.kills.push_back(kill_from(e));
    for (const ojson& e : j.at("flashes")) r.flashes.push_back(flash_from(e));
    for (const ojson& e : j.at("bombEvents")) r.bomb_events.push_back(bomb_from(e));
    for (const ojson& e : j.at("grenades")) r.grenades.push_back(grenade_from(e));
    for (const ojson& e : j.at("weaponFires")) r.weapon_fires.push_back(fire_from(e));
    for (const ojson& f : j.at("frames")) r.frames.push_back(frame_from(f));
    r.invalid_reasons = j.at("invalidReasons").get<std::vector<std::string>>();
    return r;
}

}  // namespace

std::string emit_json(const DemoDocument& doc) {
    ojson j;
    j["mapName"] = doc.meta.map_name;
    j["tickRate"] = doc.meta.tick_rate;
    j["demoVersion"] = doc.meta.demo_version;
    j["sourceFile"] = doc.meta.source_file;
    j["parserParameters"] = ojson{{"parseRate", doc.parser_params.parse_rate},
                                  {"dropIncompleteRounds", doc.parser_params.drop_incomplete_rounds}};
    j["serverVars"] = ojson{{"freezeTimeSecs", doc.server_vars.freeze_time_secs},
                            {"roundTimeSecs", doc.server_vars.round_time_secs},
                            {"bombTimerSecs", doc.server_vars.bomb_timer_secs},
                            {"roundEndSecs", doc.server_vars.round_end_secs},
                            {"maxRegulationRounds", doc.server_vars.max_regulation_rounds},
                            {"sideSwitchAfter", doc.server_vars.side_switch_after},
                            {"fireLifetimeSecs", doc.server_vars.fire_lifetime_secs},
                            {"smokeLifetimeSecs", doc.server_vars.smoke_lifetime_secs}};
    j["players"] = ojson::array();
    for (const PlayerInfo& p : doc.players)
        j["players"].push_back(
            ojson{{"id", p.id}, {"name", p.name}, {"startSide", side_name(p.start_side)}});
    j["cleaning"] = ojson{{"droppedInvalid", doc.cleaning.dropped_invalid},
                          {"orphanRoundEnds", doc.cleaning.orphan_round_ends},
                          {"droppedIncomplete", doc.cleaning.dropped_incomplete},
                          {"discardedPreMatch", doc.cleaning.discarded_pre_match},
                          {"scoreRepairs", doc.cleaning.score_repairs},
                          {"winnerConflicts", doc.cleaning.winner_conflicts},
                          {"ignoredPhaseChanges", doc.cleaning.ignored_phase_changes},
                          {"unknownRecords", doc.cleaning.unknown_records}};
    j["gameRounds"] = ojson::array();
    for (const GameRound& r : doc.game_rounds) j["gameRounds"].push_back(to_json(r));
    return j.dump(2) + "\n";
}

DemoDocument parse_json(const std::string& text) {
    try {
        const ojson j = ojson::parse(text);
        DemoDocument doc;
        doc.meta.map_name = j.at("mapName").get<std::string>();
        doc.meta.tick_rate = j.at("tickRate").get<int>();
        doc.meta.demo_version = j.at("demoVersion").get<int>();
        doc.meta.source_file = j.at("sourceFile").get<std::string>();
        const ojson& pp = j.at("parserParameters");
        doc.parser_params.parse_rate = pp.at("parseRate").get<int>();
        doc.parser_params.drop_incomplete_rounds = pp.at("dropIncompleteRounds").get<bool>();
        const ojson& sv = j.at("serverVars");
        doc.server_vars.freeze_time_secs = sv.at("freezeTimeSecs").get<int>();
        doc.server_vars.round_time_secs = sv.at("roundTimeSecs").get<int>();
        doc.server_vars.bomb_timer_secs = sv.at("bombTimerSecs").get<int>();
        doc.server_vars.round_end_secs = sv.at("roundEndSecs").get<int>();
        doc.server_vars.max_regulation_rounds = sv.at("maxRegulationRounds").get<int>();
        doc.server_vars.side_switch_after = sv.at("sideSwitchAfter").get<int>();
        doc.server_vars.fire_lifetime_secs = sv.at("fireLifetimeSecs").get<double>();
        doc.server_vars.smoke_lifetime_secs = sv.at("smokeLifetimeSecs").get<double>();
        for (const ojson& p : j.at("players")) {
            PlayerInfo info;
            info.id = p.at("id").get<std::uint8_t>();
            info.name = p.at("name").get<std::string>();
            info.start_side = side_from(p.at("startSide"));
            doc.players.push_back(info);
        }
        const ojson& cl = j.at("cleaning");
        doc.cleaning.dropped_invalid = cl.at("droppedInvalid").get<int>();
        doc.cleaning.orphan_round_ends = cl.at("orphanRoundEnds").get<int>();
        doc.cleaning.dropped_incomplete = cl.at("droppedIncomplete").get<int>();
        doc.cleaning.discarded_pre_match = cl.at("discardedPreMatch").get<int>();
        doc.cleaning.score_repairs = cl.at("scoreRepairs").get<int>();
        doc.cleaning.winner_conflicts = cl.at("winnerConflicts").get<int>();
        doc.cleaning.ignored_phase_changes = cl.at("ignoredPhaseChanges").get<int>();
        doc.cleaning.unknown_records = cl.at("unknownRecords").get<int>();
        for (const ojson& r : j.at("gameRounds")) doc.game_rounds.push_back(round_from(r));
        return doc;
    } catch (const ojson::exception& e) {
        throw BadDocument(std::string("malformed document JSON: ") + e.what());
    }
}

void write_document_file(const DemoDocument& doc, const std::string& path) {
    write_file_maybe_gzip(path, emit_json(doc));
}

DemoDocument read_document_file(const std::string& path) {
    return parse_json(read_file(path));
}

// --- datasets ----------------------------------------------------------------

namespace {

ojson sample_to_json(const Sample& s) {
    ojson j;
    j["label"] = s.label;
    j["roundNum"] = s.round_num;
    j["tick"] = s.tick;
    j["vec"] = s.vec;
    j["rows"] = ojson::array();
    for (const auto& row : s.rows) j["rows"].push_back(std::vector<double>(row.begin(), row.end()));
    return j;
}

Sample sample_from_json(const ojson& j) {
    Sample s;
    s.label = j.at("label").get<int>();
    s.round_num = j.at("roundNum").get<int>();
    s.tick = j.at("tick").get<Tick>();
    s.vec = j.at("vec").get<std::vector<double>>();
    for (const ojson& row : j.at("rows")) {
        auto values = row.get<std::vector<double>>();
        if (values.size() != kPlayerFeatureCount)
            throw BadDocument("player row has wrong feature count");
        std::array<double, kPlayerFeatureCount> arr{};
        std::copy(values.begin(), values.end(), arr.begin());
        s.rows.push_back(arr);
    }
    return s;
}

}  // namespace

std::string dataset_to_json(const Dataset& dataset) {
    ojson j;
    j["version"] = 1;
    for (const auto& [key, split] : {std::pair{"train", &dataset.train},
                                     std::pair{"val", &dataset.val},
                                     std::pair{"test", &dataset.test}}) {
        j[key] = ojson::array();
        for (const Sample& s : *split) j[key].push_back(sample_to_json(s));
    }
    return j.dump(2) + "\n";
}

Dataset dataset_from_json(const std::string& text) {
    try {
        const ojson j = ojson::parse(text);
        if (j.at("version").get<int>() != 1) throw BadDocument("unsupported dataset version");
        Dataset d;
        for (const ojson& s : j.at("train")) d.train.push_back(sample_from_json(s));
        for (const ojson& s : j.at("val")) d.val.push_back(sample_from_json(s));
        for (const ojson& s : j.at("test")) d.test.push_back(sample_from_json(s));
        return d;
    } catch (const ojson::exception& e) {
        throw BadDocument(std::string("malformed dataset JSON: ") + e.what());
    }
}

void write_dataset_file(const Dataset& dataset, const std::string& path) {
    write_file_maybe_gzip(path, dataset_to_json(dataset));
}

Dataset read_dataset_file(const std::string& path) {
    return dataset_from_json(read_file(path));
}

std::string ground_truth_json(const GroundTruth& truth) {
    ojson j;
    j["rounds"] = ojson::array();
    for (const RoundTruth& r : truth.rounds) {
        ojson row;
        row["roundNum"] = r.round_num;
        row["winner"] = side_name(r.winner);
        row["reason"] = reason_name(r.reason);
        row["ctScore"] = r.ct_score;
        row["tScore"] = r.t_score;
        row["bombPlanted"] = r.bomb_planted;
        row["ctStartEqVal"] = r.ct_start_eq_val;
        row["tStartEqVal"] = r.t_start_eq_val;
        row["damages"] = r.damages;
        row["kills"] = r.kills;
        row["flashes"] = r.flashes;
        row["bombEvents"] = r.bomb_events;
        row["grenades"] = r.grenades;
        row["weaponFires"] = r.weapon_fires;
        j["rounds"].push_back(std::move(row));
    }
    j["players"] = ojson::object();
    for (const auto& [id, p] : truth.players) {
        ojson row;
        row["kills"] = p.kills;
        row["deaths"] = p.deaths;
        row["headshots"] = p.headshots;
        row["damage"] = p.damage;
        row["flashesThrown"] = p.flashes_thrown;
        row["grenadesThrown"] = p.grenades_thrown;
        row["bombPlants"] = p.bomb_plants;
        row["bombDefuses"] = p.bomb_defuses;
        row["roundsPlayed"] = p.rounds_played;
        j["players"][std::to_string(id)] = std::move(row);
    }
    j["finalCtScore"] = truth.final_ct_score;
    j["finalTScore"] = truth.final_t_score;
    return j.dump(2) + "\n";
}

// --- evaluation artifacts -----------------------------------------------------

std::string calibration_report_json(const CalibrationReport& report) {
    ojson j;
    j["bins"] = report.bins;
    j["n"] = report.n;
    j["logLoss"] = report.log_loss;
    j["ece"] = report.ece;
    j["binStats"] = ojson::array();
    for (const CalibrationBin& b : report.bin_stats)
        j["binStats"].push_back(ojson{{"size", b.size}, {"acc", b.acc}, {"conf", b.conf}});
    return j.dump(2) + "\n";
}

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string calibration_report_csv(const CalibrationReport& report) {
    std::string out = "bin,lo,hi,size,acc,conf\n";
    const double width = 1.0 / report.bins;
    for (std::size_t i = 0; i < report.bin_stats.size(); ++i) {
        const CalibrationBin& b = report.bin_stats[i];
        out += std::to_string(i) + "," + fixed6(i * width) + "," + fixed6((i + 1) * width) + "," +
               std::to_string(b.size) + "," + fixed6(b.acc) + "," + fixed6(b.conf) + "\n";
    }
    return out;
}

std::string win_curve_csv(std::span<const std::pair<Tick, double>> curve) {
    std::string out = "tick,ctWinProb\n";
    for (const auto& [tick, p] : curve) out += std::to_string(tick) + "," + fixed6(p) + "\n";
    return out;
}

std::string corpus_summary_json(const CorpusSummary& summary) {
    ojson j;
    j["documents"] = summary.documents;
    j["rounds"] = summary.rounds;
    j["actions"] = summary.actions;
    j["actionsPerRound"] = summary.actions_per_round;
    j["framesPerRound"] = summary.frames_per_round;
    j["bombPlantRate"] = summary.bomb_plant_rate;
    j["actionCounts"] = ojson::object();
    for (const auto& [name, count] : summary.action_counts) j["actionCounts"][name] = count;
    j["actionMix"] = ojson::object();
    for (const auto& [name, share] : summary.action_mix) j["actionMix"][name] = share;
    j["reasonMix"] = ojson::object();
    for (const auto& [name, share] : summary.reason_mix) j["reasonMix"][name] = share;
    return j.dump(2) + "\n";
}

}  // namespace demoforge
