#pragma once

#include <string>

namespace tbdfs {

// Level comes from the TBDFS_LOG environment variable: error, warn, info,
// debug. Default: warn.
void log_error(const std::string& msg);
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace tbdfs
