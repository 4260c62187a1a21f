#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cits {

/// Dotted numeric software version with 1 to 4 segments.
///
/// Comparison is segment-wise numeric; missing trailing segments compare as
/// zero, so "1.2" == "1.2.0".
class Version {
 public:
  Version() : segments_{0} {}
  explicit Version(std::vector<std::uint32_t> segments);

  /// Throws ParseError on empty input, non-digit characters, empty
  /// segments, more than four segments or segment overflow.
  static Version parse(std::string_view text);

  const std::vector<std::uint32_t>& segments() const { return segments_; }
  std::string str() const;

  friend std::strong_ordering operator<=>(const Version& a, const Version& b);
  friend bool operator==(const Version& a, const Version& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  std::vector<std::uint32_t> segments_;
};

/// Half-open interval [lo, hi). A missing bound is unbounded on that side.
struct VersionInterval {
  std::optional<Version> lo;
  std::optional<Version> hi;

  bool contains(const Version& v) const;
};

/// Finite union of half-open version intervals, the shape of "fixed in"
/// advisories.
class VersionRange {
 public:
  VersionRange() = default;
  explicit VersionRange(std::vector<VersionInterval> intervals)
      : intervals_(std::move(intervals)) {}

  /// Matches every version.
  static VersionRange any() { return VersionRange({VersionInterval{}}); }

  bool contains(const Version& v) const;
  bool empty() const { return intervals_.empty(); }
  const std::vector<VersionInterval>& intervals() const { return intervals_; }

  /// e.g. "[5.2.0,5.2.16)|[5.3.0,5.3.7)"; unbounded ends print as "*".
  std::string str() const;

 private:
  std::vector<VersionInterval> intervals_;
};

}  // namespace cits
