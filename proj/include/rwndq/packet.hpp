#ifndef RWNDQ_PACKET_HPP
#define RWNDQ_PACKET_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <span>

#include "rwndq/sim_time.hpp"

namespace rwndq {

// Wire model: 1500-byte MTU, 20 bytes IPv4 + 20 bytes TCP, no options on the
// data path. The window-scale factor travels as connection metadata (and in
// the reserved bits, see encode_scale), not as a TCP option.
constexpr std::int64_t kMtuBytes = 1500;
constexpr std::int64_t kHeaderBytes = 40;
constexpr std::int64_t kDefaultMss = kMtuBytes - kHeaderBytes;
constexpr int kMaxWindowScale = 14;
constexpr std::int64_t kMaxWindowField = 65535;

// TCP flag bits as used in the canonical flags byte.
namespace tcpflag {
constexpr std::uint8_t fin = 0x01;
constexpr std::uint8_t syn = 0x02;
constexpr std::uint8_t rst = 0x04;
constexpr std::uint8_t ack = 0x10;
constexpr std::uint8_t ece = 0x40;
} // namespace tcpflag

enum class EcnCodepoint : std::uint8_t {
    not_ect = 0,
    ect1 = 1,
    ect0 = 2,
    ce = 3,
};

struct FlowKey {
    std::uint32_t src_addr = 0;
    std::uint32_t dst_addr = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;

    auto operator<=>(const FlowKey&) const = default;

    FlowKey reversed() const {
        return FlowKey{dst_addr, src_addr, dst_port, src_port};
    }
};

struct TcpHeaderView {
    std::uint8_t flags = 0;
    std::uint16_t rwnd_field = 0; // advertised window, unscaled 16-bit field
    std::uint8_t reserved = 0;    // 4-bit scale carrier, 15 == corrupted
    std::uint16_t checksum = 0;
    // Sequence numbers are kept at 64 bits so long transfers need no wrap
    // handling; the canonical serialization takes the low 32 bits.
    std::uint64_t seq = 0;
    std::uint64_t ack_no = 0;
    std::uint32_t payload_len = 0;

    bool has(std::uint8_t flag) const { return (flags & flag) != 0; }
};

struct Ipv4HeaderView {
    EcnCodepoint ecn = EcnCodepoint::not_ect;
    std::uint16_t checksum = 0;
    std::uint16_t total_len = 0;
};

struct Packet {
    FlowKey flow;
    Ipv4HeaderView ip;
    TcpHeaderView tcp;
    SimTime created_at = 0;
    std::uint32_t size_on_wire = 0;
    // Simulation bookkeeping, not a header field.
    std::uint32_t conn_id = 0;
    // Window-scale option as announced on SYN / SYN-ACK. Modeled as
    // connection metadata rather than on-the-wire option bytes.
    std::uint8_t wscale_opt = 0;

    bool is_syn_ack() const {
        return tcp.has(tcpflag::syn) && tcp.has(tcpflag::ack);
    }
};

using ChecksumWord = std::uint16_t;

// Internet checksum (one's-complement of the one's-complement sum with
// end-around carry) over 16-bit words. Empty input yields 0xFFFF.
ChecksumWord full_checksum(std::span<const std::uint16_t> words);

// Patches a checksum after one 16-bit word of the covered data changed from
// old_field to new_field. Matches a full recomputation exactly for any header
// with at least one nonzero word (always true for the canonical headers,
// whose offset word is never zero).
ChecksumWord incremental_checksum_update(ChecksumWord old_csum,
                                         std::uint16_t old_field,
                                         std::uint16_t new_field);

// Window field <-> byte values under a scale exponent.
std::int64_t effective_window(std::uint16_t field, int scale);
std::uint16_t field_for_window(std::int64_t window_bytes, int scale);

// Canonical 16-bit-word serializations used by all checksum arithmetic.
// Field order and layout are documented in the README; tests recompute
// checksums from these words with an independent reference.
std::array<std::uint16_t, 10> tcp_header_words(const Packet& pkt);
std::array<std::uint16_t, 10> ipv4_header_words(const Packet& pkt);

// Computes and stores both header checksums from the canonical words.
void set_checksums(Packet& pkt);
bool tcp_checksum_valid(const Packet& pkt);
bool ip_checksum_valid(const Packet& pkt);

// Writes `scale` into the reserved bits of an ACK, keeping the TCP checksum
// valid. Requires the ACK flag and scale <= 14.
void encode_scale(Packet& pkt, int scale);

struct ScaleDecode {
    int scale = 0;    // decoded value, 0 when invalid
    bool valid = true;
};

// Reads and zeroes the reserved bits, patching the TCP checksum. A carrier
// value above 14 signals corrupted or non-shim traffic: the result is
// flagged invalid and callers treat it as scale 0.
ScaleDecode decode_and_clear_scale(Packet& pkt);

// Overwrites the TCP window field, patching the TCP checksum.
void set_window_field(Packet& pkt, std::uint16_t new_field);

// Sets the CE codepoint on an ECT packet, patching the IP checksum.
// Returns false (and leaves the packet alone) for not-ECT or already-CE.
bool set_congestion_experienced(Packet& pkt);

} // namespace rwndq

#endif
