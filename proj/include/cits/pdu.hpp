#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cits/errors.hpp"
#include "cits/topology.hpp"

namespace cits {

// Wire layout (big-endian):
//   magic "CITS" | version u8 | interface u8 | msg_type u16 | source u32 |
//   dest u32 | sequence u32 | payload_len u16 | payload | crc32 u32
// The CRC (IEEE 802.3, reflected) covers every byte before it.
inline constexpr std::size_t kPduHeaderSize = 22;
inline constexpr std::size_t kPduCrcSize = 4;
inline constexpr std::size_t kMaxPayload = 65535;
inline constexpr std::uint8_t kPduVersion = 1;

struct Pdu {
  std::uint8_t version = kPduVersion;
  std::uint16_t msg_type = 0;
  NodeId source;
  NodeId dest;
  std::uint32_t sequence = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Pdu&, const Pdu&) = default;
};

struct Frame {
  ProtocolKind interface = ProtocolKind::Mqtt;
  std::vector<std::uint8_t> bytes;
};

/// Bidirectional node id <-> 32-bit wire index. Indices follow sorted id order.
class NodeIndexTable {
 public:
  NodeIndexTable() = default;
  explicit NodeIndexTable(std::vector<NodeId> ids);
  static NodeIndexTable from_topology(const Topology& t);

  std::optional<std::uint32_t> index_of(const NodeId& id) const;
  std::optional<NodeId> id_of(std::uint32_t index) const;
  std::size_t size() const { return ids_.size(); }

 private:
  std::vector<NodeId> ids_;
};

enum class DecodeErrorKind {
  BadMagic,
  BadVersion,
  CrcMismatch,
  /// Byte count disagrees with the header (short header, short payload or
  /// trailing bytes).
  Truncated,
  /// CRC-valid frame carrying an unknown interface code or node index.
  UnknownField,
};

std::string_view to_string(DecodeErrorKind kind);

class DecodeError : public Error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  DecodeErrorKind kind() const { return kind_; }

 private:
  DecodeErrorKind kind_;
};

/// Table-driven CRC-32 (IEEE 802.3 polynomial, reflected, init/xorout ~0).
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Throws UnknownNodeIndex or PayloadTooLarge.
Frame encode_pdu(const Pdu& pdu, ProtocolKind interface, const NodeIndexTable& ids);

/// Throws DecodeError.
Pdu decode_pdu(std::span<const std::uint8_t> bytes, const NodeIndexTable& ids);
Pdu decode_pdu(const Frame& frame, const NodeIndexTable& ids);

/// How a message fans out across the interfaces available on a hop.
struct DispatchPolicy {
  enum class Mode { All, Preferred };
  Mode mode = Mode::All;
  std::vector<ProtocolKind> order;

  static DispatchPolicy all() { return {Mode::All, {}}; }
  static DispatchPolicy preferred(std::vector<ProtocolKind> order) {
    return {Mode::Preferred, std::move(order)};
  }
};

/// `All` emits one frame per available interface (ascending wire code);
/// `Preferred` emits one frame on the first available interface in the
/// preference order. Throws NoInterfaceAvailable.
std::vector<Frame> hybrid_multiplex(const Pdu& pdu, const std::set<ProtocolKind>& available,
                                    const DispatchPolicy& policy, const NodeIndexTable& ids);

}  // namespace cits
