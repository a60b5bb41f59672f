#pragma once

#include <iosfwd>
#include <memory>
#include <optional>

#include "demoforge/model.hpp"

namespace demoforge {

// ESDM v1 — little-endian, fixed-width binary demo format.
//
//   header:  magic "ESDM" | version u16 | tickRate u16
//            | mapName (u8 len + bytes)
//            | serverVars: freeze u16, round u16, bomb u16, roundEnd u16,
//              sideSwitchAfter u16
//            | playerTable: count u8, then per player
//              { id u8, name (u8 len + bytes), startSide u8 }
//   record:  tick u32 | type u8 | payloadLen u16 | payload
//   payload: starts with one echo byte repeating the type code, then the
//            fixed field layout for that type. Readers verify the echo, so a
//            corrupted type byte can never decode as a different event.
//   end:     sentinel record, type 0xFF, payloadLen 0, tick = last event tick.

struct EsdmHeader {
    int version = 1;
    int tick_rate = 128;
    std::string map_name;
    ServerVars vars;  // max_regulation_rounds is derived: 2 * side_switch_after
    std::vector<PlayerInfo> players;  // exactly 10, 5 CT + 5 T
    bool operator==(const EsdmHeader&) const = default;
};

struct CodecError : Error {
    enum class Kind {
        BadMagic,
        UnsupportedVersion,
        BadHeader,
        TruncatedRecord,
        TickRegression,
        BadRecord,
        UnencodableEvent,
    };
    Kind kind;
    CodecError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
};

// Record type codes. 0xFF is the end-of-stream sentinel.
namespace esdm {
inline constexpr std::uint8_t kDamage = 0x01;
inline constexpr std::uint8_t kKill = 0x02;
inline constexpr std::uint8_t kFlash = 0x03;
inline constexpr std::uint8_t kBombPlant = 0x04;
inline constexpr std::uint8_t kBombDefuse = 0x05;
inline constexpr std::uint8_t kBombExplode = 0x06;
inline constexpr std::uint8_t kGrenadeThrow = 0x07;
inline constexpr std::uint8_t kWeaponFire = 0x08;
inline constexpr std::uint8_t kPlayerUpdate = 0x09;
inline constexpr std::uint8_t kPhaseChange = 0x0A;
inline constexpr std::uint8_t kRoundStart = 0x0B;
inline constexpr std::uint8_t kRoundEnd = 0x0C;
inline constexpr std::uint8_t kMatchStart = 0x0D;
inline constexpr std::uint8_t kRestartMarker = 0x0E;
inline constexpr std::uint8_t kSentinel = 0xFF;

// Fixed payload size (echo byte included) for a known type code.
std::optional<std::size_t> payload_size(std::uint8_t type);
std::uint8_t type_code(const EventBody& body);
}  // namespace esdm

// Streaming reader. Construct with read_demo(); call next() until it returns
// nullopt (sentinel reached). Reading event k touches only that record's
// bytes, so prefixes of large files are cheap.
class DemoReader {
  public:
    DemoReader(std::istream& in, EsdmHeader header, Tick last_tick);

    const EsdmHeader& header() const { return header_; }
    std::optional<GameEvent> next();
    int skipped_unknown() const { return skipped_unknown_; }
    bool finished() const { return finished_; }

  private:
    std::istream& in_;
    EsdmHeader header_;
    Tick last_tick_ = 0;
    bool saw_event_ = false;
    int skipped_unknown_ = 0;
    bool finished_ = false;
};

// Decodes the header and positions the stream at the first record.
DemoReader read_demo(std::istream& in);

// Convenience: drain an entire stream into memory.
std::pair<EsdmHeader, std::vector<GameEvent>> read_demo_all(std::istream& in,
                                                            int* skipped_unknown = nullptr);

void write_demo(std::ostream& out, const EsdmHeader& header, std::span<const GameEvent> events);

std::vector<std::uint8_t> write_demo_bytes(const EsdmHeader& header,
                                           std::span<const GameEvent> events);
std::pair<EsdmHeader, std::vector<GameEvent>> read_demo_bytes(std::span<const std::uint8_t> bytes,
                                                              int* skipped_unknown = nullptr);

std::size_t encoded_header_size(const EsdmHeader& header);

}  // namespace demoforge
