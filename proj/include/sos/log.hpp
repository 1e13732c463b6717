#pragma once

#include <cstdio>
#include <functional>
#include <mutex>
#include <string>
#include <utility>

namespace sos::log {

enum class Level { info, warning };

using Sink = std::function<void(Level, const std::string&)>;

namespace detail {
inline std::mutex& mu() {
  static std::mutex m;
  return m;
}
inline Sink& sink_ref() {
  static Sink s = [](Level lv, const std::string& msg) {
    std::fprintf(stderr, "[%s] %s\n", lv == Level::warning ? "warn" : "info",
                 msg.c_str());
  };
  return s;
}
}  // namespace detail

// Replaces the process-wide sink; pass nullptr-like empty function to silence.
inline void set_sink(Sink s) {
  std::lock_guard<std::mutex> lk(detail::mu());
  detail::sink_ref() = std::move(s);
}

inline void emit(Level lv, const std::string& msg) {
  std::lock_guard<std::mutex> lk(detail::mu());
  if (detail::sink_ref()) detail::sink_ref()(lv, msg);
}

inline void warn(const std::string& msg) { emit(Level::warning, msg); }
inline void info(const std::string& msg) { emit(Level::info, msg); }

}  // namespace sos::log
