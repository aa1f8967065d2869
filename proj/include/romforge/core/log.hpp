#pragma once

#include <atomic>
#include <cstddef>
#include <iostream>
#include <string_view>

namespace romforge::log {

inline std::atomic<std::size_t>& warning_counter() {
    static std::atomic<std::size_t> count{0};
    return count;
}

inline std::atomic<bool>& quiet_flag() {
    static std::atomic<bool> quiet{false};
    return quiet;
}

/// Total warnings emitted by this process.
inline std::size_t warning_count() { return warning_counter().load(); }

inline void set_quiet(bool quiet) { quiet_flag().store(quiet); }

inline void warn(std::string_view message) {
    ++warning_counter();
    if (!quiet_flag().load()) std::clog << "warning: " << message << '\n';
}

inline void info(std::string_view message) {
    if (!quiet_flag().load()) std::clog << message << '\n';
}

}  // namespace romforge::log
