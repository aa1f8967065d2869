#pragma once

// Little-endian primitive I/O shared by all checkpoint and archive formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "romforge/core/error.hpp"

namespace romforge::io {

namespace detail {

template <typename T>
T byteswap_if_big(T value) {
    if constexpr (std::endian::native == std::endian::big) {
        std::array<unsigned char, sizeof(T)> bytes;
        std::memcpy(bytes.data(), &value, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&value, bytes.data(), sizeof(T));
    }
    return value;
}

}  // namespace detail

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void magic(std::string_view tag) { raw(tag.data(), tag.size()); }

    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        value = detail::byteswap_if_big(value);
        raw(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    void put_f64s(std::span<const double> values) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(reinterpret_cast<const char*>(values.data()), values.size_bytes());
        } else {
            for (double v : values) put(v);
        }
    }

    void put_string(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

    std::uint64_t bytes_written() const noexcept { return written_; }

private:
    void raw(const char* data, std::size_t n) {
        out_.write(data, static_cast<std::streamsize>(n));
        if (!out_) throw RuntimeError("write failed after " + std::to_string(written_) + " bytes");
        written_ += n;
    }

    std::ostream& out_;
    std::uint64_t written_ = 0;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    /// Reads 4 bytes and throws ParseError at the magic's offset on mismatch.
    void expect_magic(std::string_view tag) {
        const std::uint64_t at = offset_;
        std::string got(tag.size(), '\0');
        raw(got.data(), got.size());
        if (got != tag) throw ParseError("bad magic, expected \"" + std::string(tag) + "\"", at);
    }

    /// Reads a u32 version and rejects anything other than `supported`.
    void expect_version(std::string_view tag, std::uint32_t supported) {
        const std::uint64_t at = offset_;
        const auto v = get<std::uint32_t>();
        if (v != supported) throw UnsupportedVersionError(std::string(tag), v, at);
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get() {
        T value;
        raw(reinterpret_cast<char*>(&value), sizeof(T));
        return detail::byteswap_if_big(value);
    }

    void get_f64s(std::span<double> out) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(reinterpret_cast<char*>(out.data()), out.size_bytes());
        } else {
            for (double& v : out) v = get<double>();
        }
    }

    std::string get_string(std::uint32_t max_len = 1u << 20) {
        const std::uint64_t at = offset_;
        const auto n = get<std::uint32_t>();
        if (n > max_len) throw ParseError("string length " + std::to_string(n) + " exceeds limit", at);
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }

    /// Guards allocations driven by untrusted counts.
    void require_plausible(std::uint64_t count, std::uint64_t elem_bytes, std::uint64_t limit_bytes,
                           std::string_view what) const {
        if (elem_bytes != 0 && count > limit_bytes / elem_bytes)
            throw ParseError(std::string(what) + " count " + std::to_string(count) + " is implausible", offset_);
    }

    std::uint64_t offset() const noexcept { return offset_; }

    bool at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

private:
    void raw(char* data, std::size_t n) {
        in_.read(data, static_cast<std::streamsize>(n));
        const auto got = static_cast<std::uint64_t>(in_.gcount());
        if (got != n) throw TruncatedError("truncated payload", offset_ + got);
        offset_ += n;
    }

    std::istream& in_;
    std::uint64_t offset_ = 0;
};

}  // namespace romforge::io
