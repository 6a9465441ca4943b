#pragma once

#include <stdexcept>
#include <string>

namespace nacest {

// Malformed or unusable input data (files, Newick text, JSON specs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nacest
