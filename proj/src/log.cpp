#include "tbdfs/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace tbdfs {

namespace {

int level_from_env() {
  const char* env = std::getenv("TBDFS_LOG");
  if (!env) return 1;
  const std::string v(env);
  if (v == "error") return 0;
  if (v == "warn") return 1;
  if (v == "info") return 2;
  if (v == "debug") return 3;
  return 1;
}

int log_level() {
  static const int level = level_from_env();
  return level;
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(log_mutex());
  std::cerr << "[" << tag << "] " << msg << "\n";
}

}  // namespace

void log_error(const std::string& msg) {
  if (log_level() >= 0) emit("error", msg);
}

void log_warn(const std::string& msg) {
  if (log_level() >= 1) emit("warn", msg);
}

void log_info(const std::string& msg) {
  if (log_level() >= 2) emit("info", msg);
}

void log_debug(const std::string& msg) {
  if (log_level() >= 3) emit("debug", msg);
}

}  // namespace tbdfs
