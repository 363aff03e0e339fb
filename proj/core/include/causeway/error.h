#ifndef CAUSEWAY_ERROR_H_
#define CAUSEWAY_ERROR_H_

#include <stdexcept>
#include <string>

namespace causeway {

// Base error for every contract violation raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input documents (CSV, schema manifests, JSON configs).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace causeway

#endif  // CAUSEWAY_ERROR_H_
