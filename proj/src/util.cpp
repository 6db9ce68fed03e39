#include "fdwd/util.hpp"

#include <atomic>
#include <charconv>
#include <iostream>

namespace fdwd {

namespace {
std::atomic<bool> g_warnings{true};
}

void log_warning(std::string_view message) {
    if (g_warnings.load()) std::cerr << "fdwd: warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) noexcept { g_warnings.store(enabled); }

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

}  // namespace fdwd
