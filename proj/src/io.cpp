#include "markiter/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace markiter {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string product_measure_csv(const ProductMeasure& nu) {
  std::string out = "state,bin,weight\n";
  for (int a = 0; a < nu.states(); ++a)
    for (int b = 0; b < nu.grid(); ++b) {
      out += std::to_string(a);
      out += ',';
      out += std::to_string(b);
      out += ',';
      out += format_double(nu.disintegration[static_cast<size_t>(a)][b]);
      out += '\n';
    }
  return out;
}

std::string skew_measure_csv(const SkewMeasure& mu) {
  std::string out = "state,bin,weight\n";
  for (int a = 0; a < mu.states(); ++a)
    for (int b = 0; b < mu.grid(); ++b) {
      out += std::to_string(a);
      out += ',';
      out += std::to_string(b);
      out += ',';
      out += format_double(mu.family[static_cast<size_t>(a)][b]);
      out += '\n';
    }
  return out;
}

std::string orbit_csv(const OrbitSample& orbit) {
  std::string out = "step,state,point\n";
  for (size_t i = 0; i < orbit.points.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += (i == 0) ? "-1" : std::to_string(orbit.states[i - 1]);
    out += ',';
    out += format_double(orbit.points[i]);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace markiter
