#pragma once

#include <string_view>

namespace fasthash {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

// Process-wide verbosity. Defaults to kQuiet so library users and tests stay silent.
void set_log_level(LogLevel level);
LogLevel log_level();

void log_info(std::string_view message);
void log_debug(std::string_view message);

}  // namespace fasthash
