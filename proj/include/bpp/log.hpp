#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace bpp {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, none = 4 };

inline LogLevel log_threshold() {
  static const LogLevel lvl = [] {
    const char* env = std::getenv("BPP_LOG");
    if (!env) return LogLevel::warn;
    if (!std::strcmp(env, "debug")) return LogLevel::debug;
    if (!std::strcmp(env, "info")) return LogLevel::info;
    if (!std::strcmp(env, "warn")) return LogLevel::warn;
    if (!std::strcmp(env, "error")) return LogLevel::error;
    if (!std::strcmp(env, "none")) return LogLevel::none;
    return LogLevel::warn;
  }();
  return lvl;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
  static const char* names[] = {"debug", "info", "warn", "error"};
  if (lvl >= log_threshold() && lvl != LogLevel::none)
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void log_debug(const std::string& m) { log_msg(LogLevel::debug, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::info, m); }
inline void log_warn(const std::string& m) { log_msg(LogLevel::warn, m); }
inline void log_error(const std::string& m) { log_msg(LogLevel::error, m); }

}  // namespace bpp
