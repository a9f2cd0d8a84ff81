#pragma once

#include <stdexcept>
#include <string>

namespace revpref {

// Exit-code classes used by the command-line front end:
//   InputError     -> 1
//   ModelError     -> 2 (data not rationalizable where that was required)
//   SolverError    -> 3
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace revpref
