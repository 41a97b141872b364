#include "kam/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace kam {
namespace {

std::mutex sink_mutex;

LogSink& sink() {
  static LogSink s = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return s;
}

}  // namespace

LogSink set_log_sink(LogSink next) {
  std::lock_guard lock(sink_mutex);
  return std::exchange(sink(), std::move(next));
}

void log_warning(std::string_view message) {
  std::lock_guard lock(sink_mutex);
  if (sink()) sink()(message);
}

}  // namespace kam
