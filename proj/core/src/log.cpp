#include "finrot/log.hpp"

#include <atomic>
#include <iostream>
#include <stdexcept>

namespace finrot {

namespace {
std::atomic<LogLevel> g_level{LogLevel::Warn};

const char* name(LogLevel l) {
  switch (l) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
    case LogLevel::Off: return "off";
  }
  return "?";
}
} // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

LogLevel parse_log_level(const std::string& s) {
  for (LogLevel l : {LogLevel::Debug, LogLevel::Info, LogLevel::Warn, LogLevel::Error, LogLevel::Off})
    if (s == name(l)) return l;
  throw std::invalid_argument("unknown log level: " + s);
}

void log_msg(LogLevel level, const std::string& msg) {
  if (level < g_level.load()) return;
  std::cerr << "[" << name(level) << "] " << msg << "\n";
}

} // namespace finrot
