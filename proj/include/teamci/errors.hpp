#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace teamci {

// Thrown when an enumeration request exceeds its configured cap.
// Carries the offending count so callers can report it.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::uint64_t count, std::uint64_t cap)
      : std::runtime_error(what), count_(count), cap_(cap) {}

  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t count_;
  std::uint64_t cap_;
};

// Problem-file syntax or schema violation; message carries location info.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace teamci
