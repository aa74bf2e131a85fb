#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace omx {

// Non-fatal conditions (degraded approximations, frozen fit parameters)
// are reported here instead of thrown. Default sink writes to stderr.
using WarningHandler = std::function<void(std::string_view)>;

void warn(std::string_view message);

// Returns the previous handler. Pass an empty function to restore stderr.
WarningHandler set_warning_handler(WarningHandler handler);

// Thrown when an iterative computation fails to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace omx
