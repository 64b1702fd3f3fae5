#include "telelink/wire.hpp"

#include <cstring>

namespace telelink {

namespace {

void put_u16(std::uint8_t* p, std::uint16_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 8);
    p[1] = static_cast<std::uint8_t>(v);
}

void put_u32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}

void put_u64(std::uint8_t* p, std::uint64_t v) {
    put_u32(p, static_cast<std::uint32_t>(v >> 32));
    put_u32(p + 4, static_cast<std::uint32_t>(v));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::uint64_t get_u64(const std::uint8_t* p) {
    return (static_cast<std::uint64_t>(get_u32(p)) << 32) | get_u32(p + 4);
}

}  // namespace

const char* decode_error_name(DecodeError e) {
    switch (e) {
        case DecodeError::too_short: return "too_short";
        case DecodeError::bad_magic: return "bad_magic";
        case DecodeError::bad_version: return "bad_version";
        case DecodeError::reserved_bits_set: return "reserved_bits_set";
        case DecodeError::length_mismatch: return "length_mismatch";
    }
    return "?";
}

void encode_header(const PacketHeader& h, std::uint8_t out[wire_header_size]) {
    out[0] = wire_magic0;
    out[1] = wire_magic1;
    out[2] = wire_version;
    std::uint8_t flags = 0;
    if (h.is_copy) flags |= wire_flag_copy;
    if (h.link == LinkId::band24) flags |= wire_flag_band24;
    out[3] = flags;
    put_u16(out + 4, h.stream_id);
    put_u32(out + 6, h.seq);
    put_u64(out + 10, h.timestamp_us);
    put_u16(out + 18, h.payload_len);
}

Result<std::vector<std::uint8_t>, EncodeError> encode_packet(
    std::uint16_t stream_id, std::uint32_t seq, Micros timestamp_us,
    std::span<const std::uint8_t> payload, LinkId link, bool is_copy) {
    if (payload.size() > wire_max_payload) return EncodeError::payload_too_large;

    PacketHeader h;
    h.stream_id = stream_id;
    h.seq = seq;
    h.timestamp_us = timestamp_us;
    h.payload_len = static_cast<std::uint16_t>(payload.size());
    h.link = link;
    h.is_copy = is_copy;

    std::vector<std::uint8_t> out(wire_header_size + payload.size());
    encode_header(h, out.data());
    if (!payload.empty()) std::memcpy(out.data() + wire_header_size, payload.data(), payload.size());
    return out;
}

Result<DecodedPacket, DecodeError> decode_packet(std::span<const std::uint8_t> datagram) {
    if (datagram.size() < wire_header_size) return DecodeError::too_short;
    const std::uint8_t* p = datagram.data();
    if (p[0] != wire_magic0 || p[1] != wire_magic1) return DecodeError::bad_magic;
    if (p[2] != wire_version) return DecodeError::bad_version;
    const std::uint8_t flags = p[3];
    if ((flags & ~(wire_flag_copy | wire_flag_band24)) != 0) return DecodeError::reserved_bits_set;

    DecodedPacket d;
    d.header.is_copy = (flags & wire_flag_copy) != 0;
    d.header.link = (flags & wire_flag_band24) ? LinkId::band24 : LinkId::band5;
    d.header.stream_id = get_u16(p + 4);
    d.header.seq = get_u32(p + 6);
    d.header.timestamp_us = get_u64(p + 10);
    d.header.payload_len = get_u16(p + 18);
    if (datagram.size() != wire_header_size + d.header.payload_len)
        return DecodeError::length_mismatch;
    d.payload = datagram.subspan(wire_header_size);
    return d;
}

}  // namespace telelink
