#include "tgbs/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace tgbs {

namespace {

std::atomic<LogLevel> g_level{LogLevel::kWarning};
std::mutex g_mutex;

void write(std::string_view tag, std::string_view message) {
  const std::lock_guard lock(g_mutex);
  std::clog << "tgbs: " << tag << ": " << message << '\n';
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_warning(std::string_view message) {
  if (g_level >= LogLevel::kWarning) write("warning", message);
}

void log_info(std::string_view message) {
  if (g_level >= LogLevel::kInfo) write("info", message);
}

}  // namespace tgbs
