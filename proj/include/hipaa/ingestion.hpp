#pragma once

// Turns a source directory or an APK into an in-memory SourceTree.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hipaa/simd/kernels.hpp"

namespace hipaa {

struct SourceFile {
    // Relative to the tree root, '/'-separated.
    std::string relative_path;
    std::vector<std::string> lines;
    bool decode_lossy = false;

    bool operator==(const SourceFile&) const = default;
};

struct SourceTree {
    std::filesystem::path root;
    // Sorted byte-wise by relative_path.
    std::vector<SourceFile> files;
    std::vector<std::string> warnings;

    const SourceFile* find(std::string_view relative_path) const;
    std::size_t line_count() const;
};

struct IngestOptions {
    std::set<std::string> extensions = default_extensions();
    std::uintmax_t max_file_bytes = 20u * 1024u * 1024u;

    static std::set<std::string> default_extensions() {
        return {".java", ".kt", ".xml", ".gradle", ".kts", ".properties"};
    }
};

// Recursively loads every matching file under `root`. Hidden directories and
// symlinks leading outside the root are skipped; unreadable, oversized and
// binary files are skipped with a warning. Throws IngestionError
// (not_a_directory).
SourceTree open_source_tree(const std::filesystem::path& root, const IngestOptions& options = {});

struct DecompilerSpec {
    // Whitespace-separated command with one `{apk}` and one `{out}`.
    std::string command_template;
    std::chrono::seconds timeout{300};

    // Throws std::invalid_argument unless both placeholders occur exactly once
    // and the timeout is positive.
    void validate() const;
};

// Unpacks the APK into workdir/unpacked, runs the decompiler into
// workdir/decompiled, and loads the result. The tree root is `workdir`;
// decompiled files appear under "decompiled/", and when the decompiler
// produced no XML, text XML resources from the archive appear under
// "unpacked/". Throws IngestionError (not_an_apk, decompiler_failed,
// decompiler_timeout, io).
SourceTree extract_apk(const std::filesystem::path& apk, const std::filesystem::path& workdir,
                       const DecompilerSpec& spec, const IngestOptions& options = {});

// Decodes UTF-8, replacing each invalid byte with U+FFFD. Sets `lossy` when
// anything was replaced.
std::string decode_utf8_lossy(std::string_view bytes, bool& lossy,
                              const simd::KernelTable& kernels = simd::active_kernels());

// Splits on LF, CRLF and CR. A trailing terminator does not start a new line.
std::vector<std::string> split_lines(std::string_view text,
                                     const simd::KernelTable& kernels = simd::active_kernels());

// True when a NUL byte occurs in the first 4 KiB.
bool looks_binary(std::string_view bytes, const simd::KernelTable& kernels = simd::active_kernels());

} // namespace hipaa
