#include <atomic>
#include <iostream>

#include "hyhtm/common.hpp"

namespace hyhtm {

const char* to_string(Space space) {
  return space == Space::hyperbolic ? "hyperbolic" : "euclidean";
}

Space parse_space(const std::string& name) {
  if (name == "hyperbolic") return Space::hyperbolic;
  if (name == "euclidean") return Space::euclidean;
  throw ConfigError("unknown space '" + name + "' (expected hyperbolic or euclidean)");
}

namespace log {
namespace {
std::atomic<Level> g_level{Level::info};
}

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void info(const std::string& message) {
  if (g_level <= Level::info) std::clog << "[hyhtm] " << message << '\n';
}

void warning(const std::string& message) {
  if (g_level <= Level::warning) std::clog << "[hyhtm] warning: " << message << '\n';
}
}  // namespace log

}  // namespace hyhtm
