#include "drmpc/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace drmpc {

namespace {

std::atomic<int> g_level{static_cast<int>(LogLevel::kWarning)};
std::mutex g_mutex;

void emit(LogLevel level, const char* tag, const std::string& msg) {
  if (static_cast<int>(level) > g_level.load()) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[drmpc " << tag << "] " << msg << '\n';
}

}  // namespace

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }
LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log_warning(const std::string& msg) {
  emit(LogLevel::kWarning, "warning", msg);
}
void log_info(const std::string& msg) { emit(LogLevel::kInfo, "info", msg); }
void log_debug(const std::string& msg) { emit(LogLevel::kDebug, "debug", msg); }

}  // namespace drmpc
