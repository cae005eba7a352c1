#include "sgbench/core/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace sgbench::log {
namespace {

std::atomic<Level> g_level{Level::Info};
std::mutex g_mutex;

void emit(Level at, const char* tag, const std::string& message) {
  if (at < g_level.load()) return;
  std::lock_guard lock(g_mutex);
  std::clog << "[" << tag << "] " << message << '\n';
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void debug(const std::string& message) { emit(Level::Debug, "debug", message); }
void info(const std::string& message) { emit(Level::Info, "info", message); }
void warn(const std::string& message) { emit(Level::Warn, "warn", message); }
void error(const std::string& message) { emit(Level::Error, "error", message); }

}  // namespace sgbench::log
