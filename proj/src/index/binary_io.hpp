#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "repograph/core/errors.hpp"

namespace repograph::detail {

template <class T>
void put(std::ostream& out, const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_array(std::ostream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DecodeError("index file truncated");
    return v;
}

template <class T>
void get_array(std::istream& in, std::vector<T>& v, std::size_t n) {
    v.resize(n);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
        throw DecodeError("index file truncated");
    }
}

inline void put_magic(std::ostream& out, std::string_view magic, std::uint32_t version) {
    out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
    put(out, version);
}

inline void expect_magic(std::istream& in, std::string_view magic, std::uint32_t version) {
    std::string got(magic.size(), '\0');
    if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
        throw DecodeError("not a " + std::string(magic) + " file");
    }
    const auto v = get<std::uint32_t>(in);
    if (v != version) throw DecodeError("unsupported " + std::string(magic) + " version " + std::to_string(v));
}

/// Guards against absurd sizes read from corrupt headers.
inline std::size_t checked_size(std::uint64_t n, std::uint64_t limit = (1ULL << 32)) {
    if (n > limit) throw DecodeError("implausible size in index file");
    return static_cast<std::size_t>(n);
}

}  // namespace repograph::detail
