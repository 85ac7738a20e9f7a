#pragma once

#include <stdexcept>
#include <string>

namespace reprbench {

enum class error_kind {
  format,      // bad magic, unknown version, malformed text record
  corruption,  // truncated or oversized payload
  validation,  // non-finite values, out-of-range ids, broken invariants in data
  argument,    // caller passed an unusable parameter
  state,       // operation applied to a value in the wrong stage
  io,          // file could not be opened, read or written
  config,      // inconsistent run configuration
  divergence,  // numeric training blew up
};

const char *to_string(error_kind kind) noexcept;

class error : public std::runtime_error {
 public:
  error(error_kind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  error_kind kind() const noexcept { return kind_; }

 private:
  error_kind kind_;
};

#define REPRBENCH_DEFINE_ERROR(name, kind_value)                  \
  class name : public error {                                     \
   public:                                                        \
    explicit name(const std::string &message)                     \
        : error(error_kind::kind_value, message) {}               \
  };

REPRBENCH_DEFINE_ERROR(format_error, format)
REPRBENCH_DEFINE_ERROR(corruption_error, corruption)
REPRBENCH_DEFINE_ERROR(validation_error, validation)
REPRBENCH_DEFINE_ERROR(argument_error, argument)
REPRBENCH_DEFINE_ERROR(state_error, state)
REPRBENCH_DEFINE_ERROR(io_error, io)
REPRBENCH_DEFINE_ERROR(config_error, config)
REPRBENCH_DEFINE_ERROR(divergence_error, divergence)

#undef REPRBENCH_DEFINE_ERROR

// Throws the concrete subclass for `kind`, so rethrown errors stay catchable
// by type.
[[noreturn]] void throw_error(error_kind kind, const std::string &message);

}  // namespace reprbench
