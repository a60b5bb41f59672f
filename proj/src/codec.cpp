#include "demoforge/codec.hpp"

#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace demoforge {

namespace {

using Kind = CodecError::Kind;

constexpr char kMagic[4] = {'E', 'S', 'D', 'M'};
constexpr std::uint16_t kVersion = 1;

// ---- little-endian primitives ----

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

struct ByteCursor {
    const std::uint8_t* p;
    std::size_t n;
    std::size_t off = 0;

    bool need(std::size_t k) const { return off + k <= n; }

    std::uint8_t u8() { return p[off++]; }
    std::uint16_t u16() {
        std::uint16_t v = static_cast<std::uint16_t>(p[off]) |
                          static_cast<std::uint16_t>(p[off + 1]) << 8;
        off += 2;
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[off + i]) << (8 * i);
        off += 4;
        return v;
    }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

[[noreturn]] void fail(Kind k, const std::string& msg) { throw CodecError(k, msg); }

void check_range(bool ok, const char* what) {
    if (!ok) fail(Kind::UnencodableEvent, std::string("field out of range: ") + what);
}

void put_vec3(std::string& out, const Vec3& v) {
    put_f32(out, v.x);
    put_f32(out, v.y);
    put_f32(out, v.z);
}

Vec3 get_vec3(ByteCursor& c) {
    Vec3 v;
    v.x = c.f32();
    v.y = c.f32();
    v.z = c.f32();
    return v;
}

std::uint8_t pack_flags(const PlayerState& s) {
    std::uint8_t f = 0;
    if (s.alive) f |= 1u << 0;
    if (s.blinded) f |= 1u << 1;
    if (s.in_bomb_zone) f |= 1u << 2;
    if (s.has_helmet) f |= 1u << 3;
    if (s.has_defuse_kit) f |= 1u << 4;
    if (s.has_bomb) f |= 1u << 5;
    return f;
}

void unpack_flags(std::uint8_t f, PlayerState& s) {
    s.alive = f & (1u << 0);
    s.blinded = f & (1u << 1);
    s.in_bomb_zone = f & (1u << 2);
    s.has_helmet = f & (1u << 3);
    s.has_defuse_kit = f & (1u << 4);
    s.has_bomb = f & (1u << 5);
}

std::string encode_payload(const EventBody& body) {
    std::string out;
    put_u8(out, esdm::type_code(body));  // echo byte
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, DamageEvent>) {
                check_range(e.hp_damage >= 1 && e.hp_damage <= 100, "hpDamage");
                put_u8(out, e.attacker_id);
                put_u8(out, e.victim_id);
                put_vec3(out, e.attacker_pos);
                put_vec3(out, e.victim_pos);
                put_u8(out, e.hp_damage);
                put_u8(out, e.weapon);
            } else if constexpr (std::is_same_v<T, KillEvent>) {
                put_u8(out, e.attacker_id);
                put_u8(out, e.victim_id);
                put_vec3(out, e.attacker_pos);
                put_vec3(out, e.victim_pos);
                put_u8(out, e.weapon);
                put_u8(out, e.headshot ? 1 : 0);
            } else if constexpr (std::is_same_v<T, FlashEvent>) {
                put_u8(out, e.attacker_id);
                put_u8(out, e.victim_id);
                put_f32(out, e.flash_duration_secs);
            } else if constexpr (std::is_same_v<T, BombPlantEvent>) {
                put_u8(out, e.player_id);
                put_u8(out, static_cast<std::uint8_t>(e.site));
                put_vec3(out, e.pos);
            } else if constexpr (std::is_same_v<T, BombDefuseEvent>) {
                put_u8(out, e.player_id);
            } else if constexpr (std::is_same_v<T, BombExplodeEvent>) {
                // echo only
            } else if constexpr (std::is_same_v<T, GrenadeThrowEvent>) {
                put_u8(out, e.player_id);
                put_u8(out, static_cast<std::uint8_t>(e.grenade_type));
                put_vec3(out, e.throw_pos);
                put_vec3(out, e.land_pos);
            } else if constexpr (std::is_same_v<T, WeaponFireEvent>) {
                put_u8(out, e.player_id);
                put_vec3(out, e.pos);
                put_u8(out, e.weapon);
            } else if constexpr (std::is_same_v<T, PlayerUpdateEvent>) {
                const PlayerState& s = e.state;
                check_range(s.hp <= 100, "hp");
                check_range(s.armor <= 100, "armor");
                check_range(s.grenades_remaining <= 4, "grenadesRemaining");
                check_range(s.view_yaw >= 0.0f && s.view_yaw < 360.0f, "viewYaw");
                check_range(s.view_pitch >= -90.0f && s.view_pitch <= 90.0f, "viewPitch");
                put_u8(out, s.player_id);
                put_u8(out, static_cast<std::uint8_t>(s.side));
                put_vec3(out, s.pos);
                put_vec3(out, s.vel);
                put_f32(out, s.view_yaw);
                put_f32(out, s.view_pitch);
                put_u8(out, s.hp);
                put_u8(out, s.armor);
                put_u16(out, s.money);
                put_u16(out, s.eq_val);
                put_u8(out, s.active_weapon);
                put_u16(out, s.ping);
                put_u8(out, pack_flags(s));
                put_u8(out, s.grenades_remaining);
            } else if constexpr (std::is_same_v<T, PhaseChangeEvent>) {
                put_u8(out, static_cast<std::uint8_t>(e.phase));
            } else if constexpr (std::is_same_v<T, RoundStartEvent>) {
                check_range(e.round_num >= 0 && e.round_num <= 0xFFFF, "roundNum");
                put_u16(out, static_cast<std::uint16_t>(e.round_num));
            } else if constexpr (std::is_same_v<T, RoundEndEvent>) {
                put_u8(out, static_cast<std::uint8_t>(e.winner));
                put_u8(out, static_cast<std::uint8_t>(e.reason));
            } else {
                // MatchStart / RestartMarker: echo only
            }
        },
        body);
    return out;
}

std::uint8_t decode_enum_u8(ByteCursor& c, std::uint8_t max, const char* what) {
    std::uint8_t v = c.u8();
    if (v > max) fail(Kind::BadRecord, std::string("bad enum value for ") + what);
    return v;
}

EventBody decode_payload(std::uint8_t type, ByteCursor& c) {
    switch (type) {
        case esdm::kDamage: {
            DamageEvent e;
            e.attacker_id = c.u8();
            e.victim_id = c.u8();
            e.attacker_pos = get_vec3(c);
            e.victim_pos = get_vec3(c);
            e.hp_damage = c.u8();
            e.weapon = c.u8();
            if (e.hp_damage < 1 || e.hp_damage > 100) fail(Kind::BadRecord, "hpDamage out of range");
            return e;
        }
        case esdm::kKill: {
            KillEvent e;
            e.attacker_id = c.u8();
            e.victim_id = c.u8();
            e.attacker_pos = get_vec3(c);
            e.victim_pos = get_vec3(c);
            e.weapon = c.u8();
            e.headshot = decode_enum_u8(c, 1, "headshot") != 0;
            return e;
        }
        case esdm::kFlash: {
            FlashEvent e;
            e.attacker_id = c.u8();
            e.victim_id = c.u8();
            e.flash_duration_secs = c.f32();
            return e;
        }
        case esdm::kBombPlant: {
            BombPlantEvent e;
            e.player_id = c.u8();
            e.site = static_cast<BombSite>(decode_enum_u8(c, 1, "site"));
            e.pos = get_vec3(c);
            return e;
        }
        case esdm::kBombDefuse: {
            BombDefuseEvent e;
            e.player_id = c.u8();
            return e;
        }
        case esdm::kBombExplode:
            return BombExplodeEvent{};
        case esdm::kGrenadeThrow: {
            GrenadeThrowEvent e;
            e.player_id = c.u8();
            e.grenade_type = static_cast<GrenadeType>(decode_enum_u8(c, 4, "grenadeType"));
            e.throw_pos = get_vec3(c);
            e.land_pos = get_vec3(c);
            return e;
        }
        case esdm::kWeaponFire: {
            WeaponFireEvent e;
            e.player_id = c.u8();
            e.pos = get_vec3(c);
            e.weapon = c.u8();
            return e;
        }
        case esdm::kPlayerUpdate: {
            PlayerUpdateEvent e;
            PlayerState& s = e.state;
            s.player_id = c.u8();
            s.side = static_cast<Side>(decode_enum_u8(c, 1, "side"));
            s.pos = get_vec3(c);
            s.vel = get_vec3(c);
            s.view_yaw = c.f32();
            s.view_pitch = c.f32();
            s.hp = c.u8();
            s.armor = c.u8();
            s.money = c.u16();
            s.eq_val = c.u16();
            s.active_weapon = c.u8();
            s.ping = c.u16();
            unpack_flags(c.u8(), s);
            s.grenades_remaining = c.u8();
            if (s.hp > 100 || s.armor > 100 || s.grenades_remaining > 4)
                fail(Kind::BadRecord, "player state out of range");
            return e;
        }
        case esdm::kPhaseChange:
            return PhaseChangeEvent{static_cast<Phase>(decode_enum_u8(c, 3, "phase"))};
        case esdm::kRoundStart:
            return RoundStartEvent{static_cast<int>(c.u16())};
        case esdm::kRoundEnd: {
            RoundEndEvent e;
            e.winner = static_cast<Side>(decode_enum_u8(c, 1, "winner"));
            e.reason = static_cast<RoundEndReason>(decode_enum_u8(c, 4, "reason"));
            return e;
        }
        case esdm::kMatchStart:
            return MatchStartEvent{};
        case esdm::kRestartMarker:
            return RestartMarkerEvent{};
        default:
            fail(Kind::BadRecord, "decode_payload on unknown type");
    }
}

std::string encode_header(const EsdmHeader& h) {
    if (h.players.size() != 10) fail(Kind::BadHeader, "player table must have 10 entries");
    int ct = 0;
    for (const auto& p : h.players) ct += p.start_side == Side::CT ? 1 : 0;
    if (ct != 5) fail(Kind::BadHeader, "player table must have 5 players per side");
    check_range(h.map_name.size() >= 1 && h.map_name.size() <= 255, "mapName length");
    check_range(h.tick_rate >= 1 && h.tick_rate <= 0xFFFF, "tickRate");
    for (int v : {h.vars.freeze_time_secs, h.vars.round_time_secs, h.vars.bomb_timer_secs,
                  h.vars.round_end_secs, h.vars.side_switch_after})
        check_range(v >= 1 && v <= 0xFFFF, "serverVars");

    std::string out;
    out.append(kMagic, 4);
    put_u16(out, kVersion);
    put_u16(out, static_cast<std::uint16_t>(h.tick_rate));
    put_u8(out, static_cast<std::uint8_t>(h.map_name.size()));
    out.append(h.map_name);
    put_u16(out, static_cast<std::uint16_t>(h.vars.freeze_time_secs));
    put_u16(out, static_cast<std::uint16_t>(h.vars.round_time_secs));
    put_u16(out, static_cast<std::uint16_t>(h.vars.bomb_timer_secs));
    put_u16(out, static_cast<std::uint16_t>(h.vars.round_end_secs));
    put_u16(out, static_cast<std::uint16_t>(h.vars.side_switch_after));
    put_u8(out, static_cast<std::uint8_t>(h.players.size()));
    for (const auto& p : h.players) {
        check_range(p.name.size() <= 255, "player name length");
        put_u8(out, p.id);
        put_u8(out, static_cast<std::uint8_t>(p.name.size()));
        out.append(p.name);
        put_u8(out, static_cast<std::uint8_t>(p.start_side));
    }
    return out;
}

std::string read_exact(std::istream& in, std::size_t n, const char* what) {
    std::string buf(n, '\0');
    in.read(buf.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        fail(Kind::TruncatedRecord, std::string("unexpected end of stream in ") + what);
    return buf;
}

EsdmHeader decode_header(std::istream& in) {
    std::string magic = read_exact(in, 4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) fail(Kind::BadMagic, "bad magic");

    auto u8 = [&](const char* what) {
        return static_cast<std::uint8_t>(read_exact(in, 1, what)[0]);
    };
    auto u16 = [&](const char* what) {
        std::string b = read_exact(in, 2, what);
        return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[0]) |
                                          (static_cast<std::uint8_t>(b[1]) << 8));
    };

    EsdmHeader h;
    h.version = u16("version");
    if (h.version != kVersion)
        fail(Kind::UnsupportedVersion, "unsupported version " + std::to_string(h.version));
    h.tick_rate = u16("tickRate");
    if (h.tick_rate < 1) fail(Kind::BadHeader, "tickRate must be >= 1");
    const std::uint8_t name_len = u8("mapName length");
    if (name_len == 0) fail(Kind::BadHeader, "empty mapName");
    h.map_name = read_exact(in, name_len, "mapName");
    h.vars.freeze_time_secs = u16("freezeTimeSecs");
    h.vars.round_time_secs = u16("roundTimeSecs");
    h.vars.bomb_timer_secs = u16("bombTimerSecs");
    h.vars.round_end_secs = u16("roundEndSecs");
    h.vars.side_switch_after = u16("sideSwitchAfter");
    // The header carries five vars; regulation length is 2x the switch point.
    h.vars.max_regulation_rounds = 2 * h.vars.side_switch_after;
    const std::uint8_t count = u8("player count");
    if (count != 10) fail(Kind::BadHeader, "player table must have 10 entries");
    int ct = 0;
    for (int i = 0; i < count; ++i) {
        PlayerInfo p;
        p.id = u8("player id");
        const std::uint8_t nlen = u8("player name length");
        p.name = read_exact(in, nlen, "player name");
        const std::uint8_t side = u8("player side");
        if (side > 1) fail(Kind::BadHeader, "bad startSide");
        p.start_side = static_cast<Side>(side);
        ct += p.start_side == Side::CT ? 1 : 0;
        h.players.push_back(std::move(p));
    }
    if (ct != 5) fail(Kind::BadHeader, "player table must have 5 players per side");
    return h;
}

}  // namespace

namespace esdm {

std::optional<std::size_t> payload_size(std::uint8_t type) {
    switch (type) {
        case kDamage: return 29;
        case kKill: return 29;
        case kFlash: return 7;
        case kBombPlant: return 15;
        case kBombDefuse: return 2;
        case kBombExplode: return 1;
        case kGrenadeThrow: return 27;
        case kWeaponFire: return 15;
        case kPlayerUpdate: return 46;
        case kPhaseChange: return 2;
        case kRoundStart: return 3;
        case kRoundEnd: return 3;
        case kMatchStart: return 1;
        case kRestartMarker: return 1;
        default: return std::nullopt;
    }
}

std::uint8_t type_code(const EventBody& body) {
    struct Visitor {
        std::uint8_t operator()(const DamageEvent&) const { return kDamage; }
        std::uint8_t operator()(const KillEvent&) const { return kKill; }
        std::uint8_t operator()(const FlashEvent&) const { return kFlash; }
        std::uint8_t operator()(const BombPlantEvent&) const { return kBombPlant; }
        std::uint8_t operator()(const BombDefuseEvent&) const { return kBombDefuse; }
        std::uint8_t operator()(const BombExplodeEvent&) const { return kBombExplode; }
        std::uint8_t operator()(const GrenadeThrowEvent&) const { return kGrenadeThrow; }
        std::uint8_t operator()(const WeaponFireEvent&) const { return kWeaponFire; }
        std::uint8_t operator()(const PlayerUpdateEvent&) const { return kPlayerUpdate; }
        std::uint8_t operator()(const PhaseChangeEvent&) const { return kPhaseChange; }
        std::uint8_t operator()(const RoundStartEvent&) const { return kRoundStart; }
        std::uint8_t operator()(const RoundEndEvent&) const { return kRoundEnd; }
        std::uint8_t operator()(const MatchStartEvent&) const { return kMatchStart; }
        std::uint8_t operator()(const RestartMarkerEvent&) const { return kRestartMarker; }
    };
    return std::visit(Visitor{}, body);
}

}  // namespace esdm

DemoReader::DemoReader(std::istream& in, EsdmHeader header, Tick last_tick)
    : in_(in), header_(std::move(header)), last_tick_(last_tick) {}

std::optional<GameEvent> DemoReader::next() {
    if (finished_) return std::nullopt;
    for (;;) {
        std::string head = read_exact(in_, 7, "record header");
        ByteCursor hc{reinterpret_cast<const std::uint8_t*>(head.data()), head.size()};
        const std::uint32_t tick = hc.u32();
        const std::uint8_t type = hc.u8();
        const std::uint16_t len = hc.u16();

        if (saw_event_ && static_cast<Tick>(tick) < last_tick_)
            fail(Kind::TickRegression, "tick decreased from " + std::to_string(last_tick_) +
                                           " to " + std::to_string(tick));

        if (type == esdm::kSentinel) {
            if (len != 0) fail(Kind::BadRecord, "sentinel with nonzero payload");
            // The writer stamps the sentinel with the final event tick; a
            // mismatch means a corrupted tick somewhere in the stream.
            if (saw_event_ && static_cast<Tick>(tick) != last_tick_)
                fail(Kind::TickRegression, "sentinel tick does not match last event tick");
            finished_ = true;
            return std::nullopt;
        }

        const auto expected = esdm::payload_size(type);
        if (expected.has_value() && len != *expected)
            fail(Kind::BadRecord, "payload length mismatch for type " + std::to_string(type));

        std::string payload = read_exact(in_, len, "record payload");
        last_tick_ = static_cast<Tick>(tick);
        saw_event_ = true;

        if (!expected.has_value()) {
            ++skipped_unknown_;  // unknown type with a valid length: skip
            continue;
        }
        ByteCursor pc{reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()};
        if (pc.u8() != type) fail(Kind::BadRecord, "payload echo byte does not match type");
        GameEvent ev;
        ev.tick = static_cast<Tick>(tick);
        ev.body = decode_payload(type, pc);
        return ev;
    }
}

DemoReader read_demo(std::istream& in) {
    EsdmHeader h = decode_header(in);
    return DemoReader(in, std::move(h), 0);
}

std::pair<EsdmHeader, std::vector<GameEvent>> read_demo_all(std::istream& in,
                                                            int* skipped_unknown) {
    DemoReader reader = read_demo(in);
    std::vector<GameEvent> events;
    while (auto ev = reader.next()) events.push_back(std::move(*ev));
    if (skipped_unknown) *skipped_unknown = reader.skipped_unknown();
    return {reader.header(), std::move(events)};
}

void write_demo(std::ostream& out, const EsdmHeader& header, std::span<const GameEvent> events) {
    std::string buf = encode_header(header);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));

    Tick last_tick = 0;
    for (const auto& ev : events) {
        if (ev.tick < 0 || ev.tick > static_cast<Tick>(std::numeric_limits<std::uint32_t>::max()))
            fail(Kind::UnencodableEvent, "tick out of u32 range");
        if (ev.tick < last_tick) fail(Kind::UnencodableEvent, "events not tick-sorted");
        last_tick = ev.tick;
        std::string rec;
        put_u32(rec, static_cast<std::uint32_t>(ev.tick));
        const std::string payload = encode_payload(ev.body);
        put_u8(rec, esdm::type_code(ev.body));
        put_u16(rec, static_cast<std::uint16_t>(payload.size()));
        rec.append(payload);
        out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
    }
    std::string sentinel;
    put_u32(sentinel, static_cast<std::uint32_t>(last_tick));
    put_u8(sentinel, esdm::kSentinel);
    put_u16(sentinel, 0);
    out.write(sentinel.data(), static_cast<std::streamsize>(sentinel.size()));
}

std::vector<std::uint8_t> write_demo_bytes(const EsdmHeader& header,
                                           std::span<const GameEvent> events) {
    std::ostringstream os(std::ios::binary);
    write_demo(os, header, events);
    const std::string s = os.str();
    return {s.begin(), s.end()};
}

std::pair<EsdmHeader, std::vector<GameEvent>> read_demo_bytes(std::span<const std::uint8_t> bytes,
                                                              int* skipped_unknown) {
    std::string s(bytes.begin(), bytes.end());
    std::istringstream is(s, std::ios::binary);
    return read_demo_all(is, skipped_unknown);
}

std::size_t encoded_header_size(const EsdmHeader& header) { return encode_header(header).size(); }

}  // namespace demoforge
