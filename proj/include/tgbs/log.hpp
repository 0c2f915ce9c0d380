#pragma once

#include <string_view>

namespace tgbs {

enum class LogLevel { kQuiet, kWarning, kInfo };

/// Process-wide verbosity for diagnostics written to stderr. Diagnostics
/// never go to primary outputs, so they cannot affect determinism.
void set_log_level(LogLevel level);
LogLevel log_level();

void log_warning(std::string_view message);
void log_info(std::string_view message);

}  // namespace tgbs
