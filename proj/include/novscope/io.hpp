#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "novscope/error.hpp"

namespace novscope::io {

static_assert(std::endian::native == std::endian::little,
              "binary cache formats assume a little-endian host");

// 64-bit FNV-1a, stable across platforms and runs.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Shortest round-trip decimal representation.
std::string format_double(double x);
std::string format_optional(const std::optional<double>& x);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

class BinaryWriter {
public:
    explicit BinaryWriter(const std::filesystem::path& path)
        : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw Error("cannot write " + path.string());
    }

    template <typename T>
    void pod(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
    void str(std::string_view s) {
        pod(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }
    template <typename T>
    void vec(const std::vector<T>& v) {
        pod(static_cast<std::uint64_t>(v.size()));
        out_.write(reinterpret_cast<const char*>(v.data()),
                   static_cast<std::streamsize>(v.size() * sizeof(T)));
    }
    void finish() {
        out_.flush();
        if (!out_) throw Error("write failed");
    }

private:
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path)
        : in_(path, std::ios::binary), path_(path.string()) {
        if (!in_) throw ValidationError("cannot read " + path_);
    }

    template <typename T>
    T pod() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        check();
        return v;
    }
    std::string bytes(std::size_t n) {
        std::string s(n, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(n));
        check();
        return s;
    }
    std::string str() { return bytes(pod<std::uint32_t>()); }
    template <typename T>
    std::vector<T> vec() {
        auto n = pod<std::uint64_t>();
        if (n > (1ULL << 34)) throw ValidationError(path_ + ": corrupt length field");
        std::vector<T> v(n);
        in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
        check();
        return v;
    }

private:
    void check() {
        if (!in_) throw ValidationError(path_ + ": truncated file");
    }
    std::ifstream in_;
    std::string path_;
};

}  // namespace novscope::io
