#ifndef NPMLE_ERROR_HPP
#define NPMLE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace npmle {

// Bad user input: malformed data, violated preconditions. CLI exit code 2.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A solver failed to reach its certificate. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace npmle

#endif
