#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fdwd {

// Warnings go to stderr unless silenced (tests silence them).
void log_warning(std::string_view message);
void set_warnings_enabled(bool enabled) noexcept;

// splitmix64 finalizer; derives independent stream seeds from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return mix_seed(mix_seed(mix_seed(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace fdwd
