#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "qjunction/qjunction.hpp"

namespace qjtest {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string data_path(const std::string& name) { return std::string(QJ_DATA_DIR) + "/" + name; }

inline qjunction::JunctionSpec fixture(const std::string& name) {
  return qjunction::parse_junction(read_file(data_path(name)));
}

// Cached spectral data of the shipped example (L = 8, N = 60).
inline const qjunction::SpectralData& example_data() {
  static const qjunction::SpectralData d = qjunction::spectral_data(qjunction::builtin_example());
  return d;
}

// Index of Φ0, the first member of the lowest in-band group (λ = 5 for the example).
inline int phi0_index(const qjunction::SpectralData& d) { return qjunction::first_group_in_band(d)->front(); }

}  // namespace qjtest
