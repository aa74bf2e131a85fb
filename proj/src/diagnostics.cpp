#include "omx/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace omx {

namespace {

std::mutex& handler_mutex()
{
    static std::mutex m;
    return m;
}

WarningHandler& current_handler()
{
    static WarningHandler h;
    return h;
}

} // namespace

void warn(std::string_view message)
{
    std::lock_guard lock(handler_mutex());
    if (auto& h = current_handler()) {
        h(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

WarningHandler set_warning_handler(WarningHandler handler)
{
    std::lock_guard lock(handler_mutex());
    return std::exchange(current_handler(), std::move(handler));
}

} // namespace omx
