#pragma once

#include <cstdint>
#include <string_view>

namespace cits::msg {

// msg_type registry, one block per service package. docs/messages.md mirrors
// this table.
inline constexpr std::uint16_t kOccupancyUpdate = 0x0101;
inline constexpr std::uint16_t kParkingQuery = 0x0102;
inline constexpr std::uint16_t kParkingReply = 0x0103;

inline constexpr std::uint16_t kEmergencyRegister = 0x0201;
inline constexpr std::uint16_t kEmergencyRegisterAck = 0x0202;
inline constexpr std::uint16_t kPreemptionRequest = 0x0203;
inline constexpr std::uint16_t kSignalControl = 0x0204;

inline constexpr std::uint16_t kStatusUpdate = 0x0301;

inline constexpr std::uint16_t kRouteRequest = 0x0401;
inline constexpr std::uint16_t kRouteReply = 0x0402;
inline constexpr std::uint16_t kIncidentReport = 0x0403;

inline std::string_view name(std::uint16_t type) {
  switch (type) {
    case kOccupancyUpdate: return "pm01.occupancy_update";
    case kParkingQuery: return "pm01.parking_query";
    case kParkingReply: return "pm01.parking_reply";
    case kEmergencyRegister: return "ps03.emergency_register";
    case kEmergencyRegisterAck: return "ps03.emergency_register_ack";
    case kPreemptionRequest: return "ps03.preemption_request";
    case kSignalControl: return "ps03.signal_control";
    case kStatusUpdate: return "su01.status_update";
    case kRouteRequest: return "ti03.route_request";
    case kRouteReply: return "ti03.route_reply";
    case kIncidentReport: return "ti03.incident_report";
    default: return "unknown";
  }
}

}  // namespace cits::msg
