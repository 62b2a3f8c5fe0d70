#ifndef SARCLAB_ERRORS_HPP
#define SARCLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sarclab {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// numerical failure (non-convergence, invalid values)
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sarclab

#endif
