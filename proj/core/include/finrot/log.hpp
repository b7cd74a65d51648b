#pragma once

#include <string>

namespace finrot {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

void set_log_level(LogLevel level);
LogLevel log_level();
LogLevel parse_log_level(const std::string& s); // "debug", "info", "warn", "error", "off"

// Writes "[level] message" to stderr when the level is enabled.
void log_msg(LogLevel level, const std::string& msg);

inline void log_info(const std::string& m) { log_msg(LogLevel::Info, m); }
inline void log_warn(const std::string& m) { log_msg(LogLevel::Warn, m); }

} // namespace finrot
