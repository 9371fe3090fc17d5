#include "fgdim/log.hpp"

#include <iostream>
#include <mutex>

namespace fgdim {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& sink() {
  static LogSink s;
  return s;
}

}  // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void log_message(LogLevel level, const std::string& msg) {
  std::lock_guard lock(sink_mutex());
  if (sink()) {
    sink()(level, msg);
  } else if (level == LogLevel::Warning) {
    std::cerr << "warning: " << msg << '\n';
  }
}

}  // namespace fgdim
