#pragma once

#include <functional>
#include <string_view>

namespace kam {

using LogSink = std::function<void(std::string_view)>;

// Replaces the warning sink (default writes to stderr). Returns the old one.
LogSink set_log_sink(LogSink sink);

void log_warning(std::string_view message);

}  // namespace kam
