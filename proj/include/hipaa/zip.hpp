#pragma once

// Minimal ZIP reader for APK containers: stored and deflated entries, no
// ZIP64, no encryption.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hipaa::zip {

struct Entry {
    std::string name;
    std::uint16_t method = 0;
    std::uint16_t flags = 0;
    std::uint32_t crc32 = 0;
    std::uint32_t compressed_size = 0;
    std::uint32_t uncompressed_size = 0;
    std::uint32_t local_header_offset = 0;

    bool is_directory() const { return !name.empty() && name.back() == '/'; }
};

// True when `bytes` starts with a local file header signature.
bool has_zip_magic(std::string_view bytes);

class Archive {
public:
    // Throws std::runtime_error when the central directory cannot be read.
    explicit Archive(std::string bytes);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    bool contains(std::string_view name) const;

    // Decompressed, CRC-checked contents. Throws std::runtime_error.
    std::string read(const Entry& entry) const;

private:
    std::string bytes_;
    std::vector<Entry> entries_;
};

// True when `name` is a relative path without `..` components, so it cannot
// be written outside the extraction directory.
bool is_safe_entry_name(std::string_view name);

struct ExtractReport {
    std::size_t files_written = 0;
    std::vector<std::string> warnings;
};

// Writes every safe, readable entry under `destination`.
ExtractReport extract_all(const Archive& archive, const std::filesystem::path& destination);

// Builds an archive in memory; used by tests and fixtures.
class Writer {
public:
    void add(std::string name, std::string_view contents, bool deflate = true);
    std::string finish();

private:
    std::string out_;
    std::string central_;
    std::uint16_t count_ = 0;
};

} // namespace hipaa::zip
