#pragma once

#include <stdexcept>

namespace trajseq {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace trajseq
