#pragma once

#include <string>

namespace pushrl::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Reads PUSHRL_LOG_LEVEL (debug|info|warn|error|off) once at startup;
// defaults to warn so library users are quiet unless they opt in.
void set_level(Level level);
Level level();
bool level_from_string(const std::string& s, Level& out);

void write(Level level, const std::string& msg);

inline void debug(const std::string& msg) { write(Level::debug, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void warn(const std::string& msg) { write(Level::warn, msg); }
inline void error(const std::string& msg) { write(Level::error, msg); }

}  // namespace pushrl::log
