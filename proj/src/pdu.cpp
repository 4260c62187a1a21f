#include "cits/pdu.hpp"

#include <algorithm>
#include <array>

namespace cits {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'C', 'I', 'T', 'S'};

constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

}  // namespace

NodeIndexTable::NodeIndexTable(std::vector<NodeId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

NodeIndexTable NodeIndexTable::from_topology(const Topology& t) {
  std::vector<NodeId> ids;
  ids.reserve(t.nodes.size());
  for (const auto& n : t.nodes) ids.push_back(n.id);
  return NodeIndexTable(std::move(ids));
}

std::optional<std::uint32_t> NodeIndexTable::index_of(const NodeId& id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - ids_.begin());
}

std::optional<NodeId> NodeIndexTable::id_of(std::uint32_t index) const {
  if (index >= ids_.size()) return std::nullopt;
  return ids_[index];
}

std::string_view to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::BadMagic: return "BadMagic";
    case DecodeErrorKind::BadVersion: return "BadVersion";
    case DecodeErrorKind::CrcMismatch: return "CrcMismatch";
    case DecodeErrorKind::Truncated: return "Truncated";
    case DecodeErrorKind::UnknownField: return "UnknownField";
  }
  return "?";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (auto byte : bytes) c = kCrcTable[(c ^ byte) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

Frame encode_pdu(const Pdu& pdu, ProtocolKind interface, const NodeIndexTable& ids) {
  const auto src = ids.index_of(pdu.source);
  if (!src) throw UnknownNodeIndex("no wire index for source '" + pdu.source + "'");
  const auto dst = ids.index_of(pdu.dest);
  if (!dst) throw UnknownNodeIndex("no wire index for dest '" + pdu.dest + "'");
  if (pdu.payload.size() > kMaxPayload) {
    throw PayloadTooLarge("payload of " + std::to_string(pdu.payload.size()) + " bytes exceeds 65535");
  }

  Frame f;
  f.interface = interface;
  auto& out = f.bytes;
  out.reserve(kPduHeaderSize + pdu.payload.size() + kPduCrcSize);
  for (auto m : kMagic) out.push_back(m);
  out.push_back(pdu.version);
  out.push_back(static_cast<std::uint8_t>(interface));
  put_u16(out, pdu.msg_type);
  put_u32(out, *src);
  put_u32(out, *dst);
  put_u32(out, pdu.sequence);
  put_u16(out, static_cast<std::uint16_t>(pdu.payload.size()));
  for (auto byte : pdu.payload) out.push_back(byte);
  put_u32(out, crc32(out));
  return f;
}

Pdu decode_pdu(std::span<const std::uint8_t> b, const NodeIndexTable& ids) {
  using K = DecodeErrorKind;
  if (b.size() < kMagic.size()) throw DecodeError(K::Truncated, "frame shorter than magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), b.begin())) throw DecodeError(K::BadMagic, "bad magic");
  if (b.size() < 5) throw DecodeError(K::Truncated, "frame ends before version");
  if (b[4] != kPduVersion) {
    throw DecodeError(K::BadVersion, "unsupported version " + std::to_string(b[4]));
  }
  if (b.size() < kPduHeaderSize) throw DecodeError(K::Truncated, "frame ends inside header");
  const std::size_t payload_len = get_u16(b, 20);
  const std::size_t total = kPduHeaderSize + payload_len + kPduCrcSize;
  if (b.size() != total) {
    throw DecodeError(K::Truncated, "frame is " + std::to_string(b.size()) + " bytes, header implies " +
                                        std::to_string(total));
  }
  const auto body = b.first(kPduHeaderSize + payload_len);
  if (crc32(body) != get_u32(b, kPduHeaderSize + payload_len)) {
    throw DecodeError(K::CrcMismatch, "crc mismatch");
  }
  if (b[5] < 1 || b[5] > 4) {
    throw DecodeError(K::UnknownField, "unknown interface code " + std::to_string(b[5]));
  }
  Pdu p;
  p.version = b[4];
  p.msg_type = get_u16(b, 6);
  const auto src = ids.id_of(get_u32(b, 8));
  const auto dst = ids.id_of(get_u32(b, 12));
  if (!src || !dst) throw DecodeError(K::UnknownField, "unknown node index");
  p.source = *src;
  p.dest = *dst;
  p.sequence = get_u32(b, 16);
  p.payload.assign(b.begin() + kPduHeaderSize, b.begin() + kPduHeaderSize + payload_len);
  return p;
}

Pdu decode_pdu(const Frame& frame, const NodeIndexTable& ids) {
  return decode_pdu(std::span<const std::uint8_t>(frame.bytes), ids);
}

std::vector<Frame> hybrid_multiplex(const Pdu& pdu, const std::set<ProtocolKind>& available,
                                    const DispatchPolicy& policy, const NodeIndexTable& ids) {
  if (available.empty()) throw NoInterfaceAvailable("no interface available for hybrid dispatch");
  std::vector<Frame> frames;
  if (policy.mode == DispatchPolicy::Mode::All) {
    for (auto iface : available) frames.push_back(encode_pdu(pdu, iface, ids));
    return frames;
  }
  for (auto iface : policy.order) {
    if (available.count(iface)) {
      frames.push_back(encode_pdu(pdu, iface, ids));
      return frames;
    }
  }
  throw NoInterfaceAvailable("none of the preferred interfaces is available");
}

}  // namespace cits
