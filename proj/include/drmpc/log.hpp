#pragma once

#include <string>

namespace drmpc {

enum class LogLevel { kQuiet = 0, kWarning = 1, kInfo = 2, kDebug = 3 };

/// Process-wide threshold; messages above it are dropped. Defaults to
/// kWarning.
void set_log_level(LogLevel level);
LogLevel log_level();

void log_warning(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace drmpc
