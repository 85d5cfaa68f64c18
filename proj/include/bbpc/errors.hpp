#pragma once

#include <stdexcept>
#include <string>

namespace bbpc {

// Error categories map to distinct CLI exit codes.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct PhysicalityError : std::runtime_error {
  explicit PhysicalityError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bbpc
