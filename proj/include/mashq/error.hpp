#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mashq {

// Raised for invalid input data (malformed files, impossible requests).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Decode failure inside a PNM stream; carries the byte offset of the fault.
class PnmError : public Error {
 public:
  PnmError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace mashq
