#include "cits/version.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "cits/errors.hpp"

namespace cits {

Version::Version(std::vector<std::uint32_t> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty() || segments_.size() > 4) {
    throw ParseError("version must have 1 to 4 segments");
  }
}

Version Version::parse(std::string_view text) {
  if (text.empty()) throw ParseError("empty version string");
  std::vector<std::uint32_t> segs;
  std::size_t pos = 0;
  while (true) {
    const auto dot = text.find('.', pos);
    const auto part = text.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
    if (part.empty()) {
      throw ParseError("empty segment in version '" + std::string(text) + "'");
    }
    std::uint32_t value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size()) {
      throw ParseError("bad version segment '" + std::string(part) + "' in '" + std::string(text) + "'");
    }
    segs.push_back(value);
    if (segs.size() > 4) {
      throw ParseError("version '" + std::string(text) + "' has more than 4 segments");
    }
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return Version(std::move(segs));
}

std::string Version::str() const {
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(segments_[i]);
  }
  return out;
}

std::strong_ordering operator<=>(const Version& a, const Version& b) {
  const auto n = std::max(a.segments_.size(), b.segments_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t x = i < a.segments_.size() ? a.segments_[i] : 0;
    const std::uint32_t y = i < b.segments_.size() ? b.segments_[i] : 0;
    if (x != y) return x <=> y;
  }
  return std::strong_ordering::equal;
}

bool VersionInterval::contains(const Version& v) const {
  if (lo && v < *lo) return false;
  if (hi && !(v < *hi)) return false;
  return true;
}

bool VersionRange::contains(const Version& v) const {
  return std::any_of(intervals_.begin(), intervals_.end(),
                     [&](const VersionInterval& iv) { return iv.contains(v); });
}

std::string VersionRange::str() const {
  if (intervals_.empty()) return "{}";
  std::string out;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (i) out += '|';
    const auto& iv = intervals_[i];
    out += '[';
    out += iv.lo ? iv.lo->str() : "*";
    out += ',';
    out += iv.hi ? iv.hi->str() : "*";
    out += ')';
  }
  return out;
}

}  // namespace cits
