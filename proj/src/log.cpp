#include "fasthash/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace fasthash {
namespace {

std::atomic<LogLevel> g_level{LogLevel::kQuiet};
std::mutex g_mutex;

void emit(std::string_view tag, std::string_view message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::clog << "[" << tag << "] " << message << '\n';
}

}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void log_info(std::string_view message) {
  if (g_level.load() >= LogLevel::kInfo) emit("info", message);
}

void log_debug(std::string_view message) {
  if (g_level.load() >= LogLevel::kDebug) emit("debug", message);
}

}  // namespace fasthash
