#pragma once

#include <string>

namespace sgbench::log {

enum class Level { Debug, Info, Warn, Error, Off };

void set_level(Level level);
Level level();

void debug(const std::string& message);
void info(const std::string& message);
void warn(const std::string& message);
void error(const std::string& message);

}  // namespace sgbench::log
