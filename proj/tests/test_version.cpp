#include <random>

#include "cits/errors.hpp"
#include "cits/version.hpp"
#include "doctest.h"

using cits::Version;
using cits::VersionInterval;
using cits::VersionRange;

TEST_CASE("version parse and print") {
  CHECK(Version::parse("5.2.14").segments() == std::vector<std::uint32_t>{5, 2, 14});
  CHECK(Version::parse("6.0.1.68").str() == "6.0.1.68");
  CHECK(Version::parse("7").str() == "7");
  for (const char* bad : {"", "1..2", "a", "1.2.3.4.5", "1.", ".1", "1.-2", "99999999999"}) {
    CHECK_THROWS_AS(Version::parse(bad), cits::ParseError);
  }
}

TEST_CASE("missing segments compare as zero") {
  CHECK(Version::parse("1.2") == Version::parse("1.2.0"));
  CHECK(Version::parse("1.2") == Version::parse("1.2.0.0"));
  CHECK(Version::parse("1.2") < Version::parse("1.2.0.1"));
  CHECK(Version::parse("1.10") > Version::parse("1.9"));
  CHECK(Version::parse("6.0.1.67") < Version::parse("6.0.1.68"));
}

TEST_CASE("version order is total, antisymmetric and transitive") {
  std::mt19937_64 rng(3);
  std::vector<Version> vs;
  for (int i = 0; i < 60; ++i) {
    std::vector<std::uint32_t> segs(1 + rng() % 4);
    for (auto& s : segs) s = static_cast<std::uint32_t>(rng() % 3);
    vs.emplace_back(segs);
  }
  for (const auto& a : vs) {
    for (const auto& b : vs) {
      CHECK(((a < b) + (a == b) + (a > b)) == 1);
      if (a <= b && b <= a) CHECK(a == b);
      for (const auto& c : vs) {
        if (a <= b && b <= c) CHECK(a <= c);
      }
    }
  }
}

TEST_CASE("version ranges are unions of half-open intervals") {
  const VersionRange spring({VersionInterval{Version::parse("5.2.0"), Version::parse("5.2.16")},
                             VersionInterval{Version::parse("5.3.0"), Version::parse("5.3.7")}});
  CHECK(spring.contains(Version::parse("5.2.14")));
  CHECK(spring.contains(Version::parse("5.2")));
  CHECK(spring.contains(Version::parse("5.3.6")));
  CHECK_FALSE(spring.contains(Version::parse("5.2.16")));
  CHECK_FALSE(spring.contains(Version::parse("5.3.7")));
  CHECK_FALSE(spring.contains(Version::parse("5.1.9")));
  CHECK(spring.str() == "[5.2.0,5.2.16)|[5.3.0,5.3.7)");

  const VersionRange below({VersionInterval{std::nullopt, Version::parse("6.0.1.68")}});
  CHECK(below.contains(Version::parse("0")));
  CHECK_FALSE(below.contains(Version::parse("6.0.1.68")));
  CHECK(below.str() == "[*,6.0.1.68)");

  CHECK(VersionRange::any().contains(Version::parse("123.4")));
  CHECK_FALSE(VersionRange().contains(Version::parse("1")));
  CHECK(VersionRange().str() == "{}");
}
