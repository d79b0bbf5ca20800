#pragma once

#include <string>

#include "markiter/measure.hpp"
#include "markiter/trajectory.hpp"

namespace markiter {

// Shortest text form that round-trips a double; stable across runs.
std::string format_double(double v);

// rows: state index, bin index, weight
std::string product_measure_csv(const ProductMeasure& nu);
std::string skew_measure_csv(const SkewMeasure& mu);

// rows: step, state, point; the state column holds the symbol that produced
// the point, -1 for the starting point.
std::string orbit_csv(const OrbitSample& orbit);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// FNV-1a 64-bit as fixed-width hex; used to echo the config into outputs.
std::string fnv1a_hex(const std::string& data);

}  // namespace markiter
