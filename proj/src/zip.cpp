#include "hipaa/zip.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace hipaa::zip {

namespace {

constexpr std::uint32_t kLocalHeader = 0x04034b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kEndOfCentral = 0x06054b50;
constexpr std::size_t kEndOfCentralSize = 22;
constexpr std::uint16_t kStored = 0;
constexpr std::uint16_t kDeflated = 8;

std::uint16_t read16(std::string_view bytes, std::size_t at) {
    if (at + 2 > bytes.size()) {
        throw std::runtime_error("zip: truncated record");
    }
    return static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[at]) |
                                      (static_cast<unsigned char>(bytes[at + 1]) << 8));
}

std::uint32_t read32(std::string_view bytes, std::size_t at) {
    return static_cast<std::uint32_t>(read16(bytes, at)) |
           (static_cast<std::uint32_t>(read16(bytes, at + 2)) << 16);
}

void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v & 0xFFFF));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint32_t crc_of(std::string_view data) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

std::string inflate_raw(std::string_view compressed, std::size_t expected_size) {
    z_stream stream{};
    if (inflateInit2(&stream, -MAX_WBITS) != Z_OK) {
        throw std::runtime_error("zip: inflateInit2 failed");
    }
    std::string out(expected_size, '\0');
    stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
    stream.avail_in = static_cast<uInt>(compressed.size());
    stream.next_out = reinterpret_cast<Bytef*>(out.data());
    stream.avail_out = static_cast<uInt>(out.size());
    const int status = inflate(&stream, Z_FINISH);
    const std::size_t produced = stream.total_out;
    inflateEnd(&stream);
    if (status != Z_STREAM_END || produced != expected_size) {
        throw std::runtime_error("zip: corrupt deflate stream");
    }
    return out;
}

std::string deflate_raw(std::string_view data) {
    z_stream stream{};
    if (deflateInit2(&stream, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw std::runtime_error("zip: deflateInit2 failed");
    }
    std::string out(deflateBound(&stream, static_cast<uLong>(data.size())), '\0');
    stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    stream.avail_in = static_cast<uInt>(data.size());
    stream.next_out = reinterpret_cast<Bytef*>(out.data());
    stream.avail_out = static_cast<uInt>(out.size());
    const int status = deflate(&stream, Z_FINISH);
    out.resize(stream.total_out);
    deflateEnd(&stream);
    if (status != Z_STREAM_END) {
        throw std::runtime_error("zip: deflate failed");
    }
    return out;
}

} // namespace

bool has_zip_magic(std::string_view bytes) {
    return bytes.size() >= 4 && read32(bytes, 0) == kLocalHeader;
}

Archive::Archive(std::string bytes) : bytes_(std::move(bytes)) {
    const std::string_view data = bytes_;
    if (data.size() < kEndOfCentralSize) {
        throw std::runtime_error("zip: file too small");
    }
    // The end record sits in the last 22 + 65535 bytes (trailing comment).
    const std::size_t lowest = data.size() > kEndOfCentralSize + 0xFFFF ? data.size() - kEndOfCentralSize - 0xFFFF : 0;
    std::size_t eocd = std::string_view::npos;
    for (std::size_t at = data.size() - kEndOfCentralSize + 1; at-- > lowest;) {
        if (read32(data, at) == kEndOfCentral) {
            eocd = at;
            break;
        }
    }
    if (eocd == std::string_view::npos) {
        throw std::runtime_error("zip: no end of central directory record");
    }
    const std::uint16_t count = read16(data, eocd + 10);
    const std::uint32_t directory_offset = read32(data, eocd + 16);
    if (count == 0xFFFF || directory_offset == 0xFFFFFFFF) {
        throw std::runtime_error("zip: ZIP64 archives are not supported");
    }

    std::size_t at = directory_offset;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (read32(data, at) != kCentralHeader) {
            throw std::runtime_error("zip: bad central directory entry");
        }
        Entry entry;
        entry.flags = read16(data, at + 8);
        entry.method = read16(data, at + 10);
        entry.crc32 = read32(data, at + 16);
        entry.compressed_size = read32(data, at + 20);
        entry.uncompressed_size = read32(data, at + 24);
        const std::uint16_t name_length = read16(data, at + 28);
        const std::uint16_t extra_length = read16(data, at + 30);
        const std::uint16_t comment_length = read16(data, at + 32);
        entry.local_header_offset = read32(data, at + 42);
        if (at + 46 + name_length > data.size()) {
            throw std::runtime_error("zip: truncated entry name");
        }
        entry.name = std::string(data.substr(at + 46, name_length));
        entries_.push_back(std::move(entry));
        at += 46 + name_length + extra_length + comment_length;
    }
}

bool Archive::contains(std::string_view name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

std::string Archive::read(const Entry& entry) const {
    const std::string_view data = bytes_;
    if ((entry.flags & 0x1) != 0) {
        throw std::runtime_error("zip: encrypted entry " + entry.name);
    }
    const std::size_t header = entry.local_header_offset;
    if (read32(data, header) != kLocalHeader) {
        throw std::runtime_error("zip: bad local header for " + entry.name);
    }
    const std::size_t start = header + 30 + read16(data, header + 26) + read16(data, header + 28);
    if (start + entry.compressed_size > data.size()) {
        throw std::runtime_error("zip: truncated data for " + entry.name);
    }
    const std::string_view compressed = data.substr(start, entry.compressed_size);
    std::string contents;
    if (entry.method == kStored) {
        if (entry.compressed_size != entry.uncompressed_size) {
            throw std::runtime_error("zip: size mismatch for stored entry " + entry.name);
        }
        contents = std::string(compressed);
    } else if (entry.method == kDeflated) {
        contents = inflate_raw(compressed, entry.uncompressed_size);
    } else {
        throw std::runtime_error("zip: unsupported compression method " + std::to_string(entry.method) +
                                 " for " + entry.name);
    }
    if (crc_of(contents) != entry.crc32) {
        throw std::runtime_error("zip: CRC mismatch for " + entry.name);
    }
    return contents;
}

bool is_safe_entry_name(std::string_view name) {
    if (name.empty() || name.front() == '/' || name.front() == '\\' || name.find('\0') != std::string_view::npos) {
        return false;
    }
    if (name.size() >= 2 && name[1] == ':') {
        return false;
    }
    std::size_t start = 0;
    while (start <= name.size()) {
        std::size_t end = name.find_first_of("/\\", start);
        if (end == std::string_view::npos) {
            end = name.size();
        }
        if (name.substr(start, end - start) == "..") {
            return false;
        }
        start = end + 1;
    }
    return true;
}

ExtractReport extract_all(const Archive& archive, const std::filesystem::path& destination) {
    ExtractReport report;
    std::filesystem::create_directories(destination);
    for (const Entry& entry : archive.entries()) {
        if (!is_safe_entry_name(entry.name)) {
            report.warnings.push_back("skipped unsafe archive entry: " + entry.name);
            continue;
        }
        const std::filesystem::path target = destination / std::filesystem::path(entry.name).relative_path();
        if (entry.is_directory()) {
            std::filesystem::create_directories(target);
            continue;
        }
        std::string contents;
        try {
            contents = archive.read(entry);
        } catch (const std::exception& e) {
            report.warnings.push_back(e.what());
            continue;
        }
        std::filesystem::create_directories(target.parent_path());
        std::ofstream out(target, std::ios::binary | std::ios::trunc);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            report.warnings.push_back("could not write " + target.string());
            continue;
        }
        ++report.files_written;
    }
    return report;
}

void Writer::add(std::string name, std::string_view contents, bool deflate) {
    const std::string payload = deflate ? deflate_raw(contents) : std::string(contents);
    const std::uint32_t crc = crc_of(contents);
    const auto offset = static_cast<std::uint32_t>(out_.size());
    const std::uint16_t method = deflate ? kDeflated : kStored;

    put32(out_, kLocalHeader);
    put16(out_, 20);
    put16(out_, 0);
    put16(out_, method);
    put16(out_, 0);
    put16(out_, 0x21);
    put32(out_, crc);
    put32(out_, static_cast<std::uint32_t>(payload.size()));
    put32(out_, static_cast<std::uint32_t>(contents.size()));
    put16(out_, static_cast<std::uint16_t>(name.size()));
    put16(out_, 0);
    out_ += name;
    out_ += payload;

    put32(central_, kCentralHeader);
    put16(central_, 20);
    put16(central_, 20);
    put16(central_, 0);
    put16(central_, method);
    put16(central_, 0);
    put16(central_, 0x21);
    put32(central_, crc);
    put32(central_, static_cast<std::uint32_t>(payload.size()));
    put32(central_, static_cast<std::uint32_t>(contents.size()));
    put16(central_, static_cast<std::uint16_t>(name.size()));
    put16(central_, 0);
    put16(central_, 0);
    put16(central_, 0);
    put16(central_, 0);
    put32(central_, 0);
    put32(central_, offset);
    central_ += name;
    ++count_;
}

std::string Writer::finish() {
    std::string result = out_;
    const auto directory_offset = static_cast<std::uint32_t>(result.size());
    result += central_;
    put32(result, kEndOfCentral);
    put16(result, 0);
    put16(result, 0);
    put16(result, count_);
    put16(result, count_);
    put32(result, static_cast<std::uint32_t>(central_.size()));
    put32(result, directory_offset);
    put16(result, 0);
    return result;
}

} // namespace hipaa::zip
