#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace openattr {

// Runtime failure with a category tag that survives into the CLI's
// machine-readable error output.
class Error : public std::runtime_error {
 public:
  Error(std::string type, const std::string& message)
      : std::runtime_error(message), type_(std::move(type)) {}

  const std::string& type() const noexcept { return type_; }

 private:
  std::string type_;
};

[[noreturn]] inline void fail(std::string type, const std::string& message) {
  throw Error(std::move(type), message);
}

}  // namespace openattr
