#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "telelink/core.hpp"
#include "telelink/result.hpp"
#include "telelink/units.hpp"

namespace telelink {

// Datagram layout, all multi-byte fields big-endian:
//
//   offset  0  magic        2B   0x41 0x56
//           2  version      1B   = 1
//           3  flags        1B   bit0 redundant-copy, bit1 link tag
//                                (0 band5 / 1 band24), bits 2..7 zero
//           4  stream_id    2B
//           6  seq          4B
//          10  timestamp    8B   sender clock, microseconds
//          18  payload_len  2B
//          20  payload      payload_len bytes
inline constexpr std::size_t wire_header_size = 20;
inline constexpr std::uint8_t wire_magic0 = 0x41;
inline constexpr std::uint8_t wire_magic1 = 0x56;
inline constexpr std::uint8_t wire_version = 1;
inline constexpr std::size_t wire_max_payload = 65535;

inline constexpr std::uint8_t wire_flag_copy = 0x01;
inline constexpr std::uint8_t wire_flag_band24 = 0x02;

struct PacketHeader {
    std::uint16_t stream_id = 0;
    std::uint32_t seq = 0;
    Micros timestamp_us = 0;
    std::uint16_t payload_len = 0;
    LinkId link = LinkId::band5;
    bool is_copy = false;

    friend bool operator==(const PacketHeader&, const PacketHeader&) = default;
};

enum class DecodeError : std::uint8_t {
    too_short,
    bad_magic,
    bad_version,
    reserved_bits_set,
    length_mismatch,
};
const char* decode_error_name(DecodeError e);

enum class EncodeError : std::uint8_t { payload_too_large };

void encode_header(const PacketHeader& h, std::uint8_t out[wire_header_size]);

// Header followed by the payload; the only failure is an oversized payload.
Result<std::vector<std::uint8_t>, EncodeError> encode_packet(
    std::uint16_t stream_id, std::uint32_t seq, Micros timestamp_us,
    std::span<const std::uint8_t> payload, LinkId link, bool is_copy);

struct DecodedPacket {
    PacketHeader header;
    std::span<const std::uint8_t> payload;  // view into the input datagram
};

// Strict decode: exact length, magic, version, zero reserved bits.
Result<DecodedPacket, DecodeError> decode_packet(std::span<const std::uint8_t> datagram);

}  // namespace telelink
