#include "rwndq/packet.hpp"

#include <cassert>

namespace rwndq {

namespace {

std::uint16_t fold32(std::uint32_t sum) {
    while (sum >> 16) {
        sum = (sum & 0xFFFFu) + (sum >> 16);
    }
    return static_cast<std::uint16_t>(sum);
}

} // namespace

ChecksumWord full_checksum(std::span<const std::uint16_t> words) {
    std::uint32_t sum = 0;
    for (std::uint16_t w : words) {
        sum += w;
    }
    return static_cast<ChecksumWord>(~fold32(sum) & 0xFFFFu);
}

ChecksumWord incremental_checksum_update(ChecksumWord old_csum,
                                         std::uint16_t old_field,
                                         std::uint16_t new_field) {
    // One's-complement add of the complemented old word and the new word,
    // applied to the complemented checksum (the running sum).
    std::uint32_t sum = static_cast<std::uint16_t>(~old_csum);
    sum += static_cast<std::uint16_t>(~old_field);
    sum += new_field;
    return static_cast<ChecksumWord>(~fold32(sum) & 0xFFFFu);
}

std::int64_t effective_window(std::uint16_t field, int scale) {
    assert(scale >= 0 && scale <= kMaxWindowScale);
    return static_cast<std::int64_t>(field) << scale;
}

std::uint16_t field_for_window(std::int64_t window_bytes, int scale) {
    assert(scale >= 0 && scale <= kMaxWindowScale);
    assert(window_bytes >= 0);
    std::int64_t field = window_bytes >> scale;
    if (field > kMaxWindowField) {
        field = kMaxWindowField;
    }
    return static_cast<std::uint16_t>(field);
}

std::array<std::uint16_t, 10> tcp_header_words(const Packet& pkt) {
    const TcpHeaderView& t = pkt.tcp;
    std::uint32_t seq32 = static_cast<std::uint32_t>(t.seq);
    std::uint32_t ack32 = static_cast<std::uint32_t>(t.ack_no);
    // Data offset 5 (no options), then the 4 reserved bits, then flags.
    std::uint16_t offset_word = static_cast<std::uint16_t>(
        (5u << 12) | ((t.reserved & 0x0Fu) << 8) | t.flags);
    return {
        pkt.flow.src_port,
        pkt.flow.dst_port,
        static_cast<std::uint16_t>(seq32 >> 16),
        static_cast<std::uint16_t>(seq32 & 0xFFFFu),
        static_cast<std::uint16_t>(ack32 >> 16),
        static_cast<std::uint16_t>(ack32 & 0xFFFFu),
        offset_word,
        t.rwnd_field,
        t.checksum,
        0, // urgent pointer
    };
}

std::array<std::uint16_t, 10> ipv4_header_words(const Packet& pkt) {
    const Ipv4HeaderView& ip = pkt.ip;
    return {
        static_cast<std::uint16_t>(0x4500u | static_cast<std::uint16_t>(ip.ecn)),
        ip.total_len,
        0,                               // identification
        0,                               // flags / fragment offset
        static_cast<std::uint16_t>((64u << 8) | 6u), // TTL 64, protocol TCP
        ip.checksum,
        static_cast<std::uint16_t>(pkt.flow.src_addr >> 16),
        static_cast<std::uint16_t>(pkt.flow.src_addr & 0xFFFFu),
        static_cast<std::uint16_t>(pkt.flow.dst_addr >> 16),
        static_cast<std::uint16_t>(pkt.flow.dst_addr & 0xFFFFu),
    };
}

void set_checksums(Packet& pkt) {
    pkt.tcp.checksum = 0;
    auto tw = tcp_header_words(pkt);
    pkt.tcp.checksum = full_checksum(tw);
    pkt.ip.checksum = 0;
    auto iw = ipv4_header_words(pkt);
    pkt.ip.checksum = full_checksum(iw);
}

bool tcp_checksum_valid(const Packet& pkt) {
    Packet copy = pkt;
    copy.tcp.checksum = 0;
    auto words = tcp_header_words(copy);
    return full_checksum(words) == pkt.tcp.checksum;
}

bool ip_checksum_valid(const Packet& pkt) {
    Packet copy = pkt;
    copy.ip.checksum = 0;
    auto words = ipv4_header_words(copy);
    return full_checksum(words) == pkt.ip.checksum;
}

namespace {

// The reserved bits and flags share canonical word 6; window is word 7.
std::uint16_t offset_word_of(const Packet& pkt) {
    return tcp_header_words(pkt)[6];
}

} // namespace

void encode_scale(Packet& pkt, int scale) {
    assert(pkt.tcp.has(tcpflag::ack));
    assert(scale >= 0 && scale <= kMaxWindowScale);
    std::uint16_t old_word = offset_word_of(pkt);
    pkt.tcp.reserved = static_cast<std::uint8_t>(scale);
    std::uint16_t new_word = offset_word_of(pkt);
    pkt.tcp.checksum =
        incremental_checksum_update(pkt.tcp.checksum, old_word, new_word);
}

ScaleDecode decode_and_clear_scale(Packet& pkt) {
    ScaleDecode out;
    std::uint8_t raw = pkt.tcp.reserved & 0x0Fu;
    if (raw > kMaxWindowScale) {
        out.valid = false;
        out.scale = 0;
    } else {
        out.scale = raw;
    }
    if (raw != 0) {
        std::uint16_t old_word = offset_word_of(pkt);
        pkt.tcp.reserved = 0;
        std::uint16_t new_word = offset_word_of(pkt);
        pkt.tcp.checksum =
            incremental_checksum_update(pkt.tcp.checksum, old_word, new_word);
    }
    return out;
}

void set_window_field(Packet& pkt, std::uint16_t new_field) {
    std::uint16_t old_field = pkt.tcp.rwnd_field;
    if (old_field == new_field) {
        return;
    }
    pkt.tcp.rwnd_field = new_field;
    pkt.tcp.checksum =
        incremental_checksum_update(pkt.tcp.checksum, old_field, new_field);
}

bool set_congestion_experienced(Packet& pkt) {
    if (pkt.ip.ecn != EcnCodepoint::ect0 && pkt.ip.ecn != EcnCodepoint::ect1) {
        return false;
    }
    auto old_word = ipv4_header_words(pkt)[0];
    pkt.ip.ecn = EcnCodepoint::ce;
    auto new_word = ipv4_header_words(pkt)[0];
    pkt.ip.checksum =
        incremental_checksum_update(pkt.ip.checksum, old_word, new_word);
    return true;
}

} // namespace rwndq
