#pragma once

#include <stdexcept>
#include <string>

namespace refcast {

// Bad or unreadable input data (malformed files, missing fields, schema
// violations). The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs were readable but the requested computation is not defined for
// them: singular designs, missing model terms, back-transforms outside the
// response domain. The CLI maps this to exit code 3.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violations on numeric arguments (probabilities outside
// (0,1), empty samples and so on).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace refcast
