#pragma once

#include <string>

#include "cits/topology.hpp"

inline const std::string kData = CITS_DATA_DIR;

inline cits::Topology fixture(const std::string& name) { return cits::load_topology(kData + "/" + name + ".json"); }
