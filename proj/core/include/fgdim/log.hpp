#pragma once

#include <functional>
#include <string>

namespace fgdim {

enum class LogLevel { Debug, Info, Warning };

using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Replaces the process-wide sink. The default writes warnings to stderr and
/// drops everything else. Passing an empty function restores the default.
void set_log_sink(LogSink sink);
void log_message(LogLevel level, const std::string& msg);

}  // namespace fgdim
