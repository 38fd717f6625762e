#pragma once

#include <stdexcept>
#include <string>

namespace pcad {

/// Failure classes. The CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind { usage, data, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_data(const std::string& what) { throw Error(ErrorKind::data, what); }
[[noreturn]] inline void fail_usage(const std::string& what) { throw Error(ErrorKind::usage, what); }
[[noreturn]] inline void fail_internal(const std::string& what) { throw Error(ErrorKind::internal, what); }

// Prints "[pcad] warning: ..." on stderr.
void warn(const std::string& message);

}  // namespace pcad
