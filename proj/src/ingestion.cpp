#include "hipaa/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "hipaa/errors.hpp"
#include "hipaa/process.hpp"
#include "hipaa/zip.hpp"

namespace fs = std::filesystem;

namespace hipaa {

namespace {

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
constexpr std::size_t kBinarySniffBytes = 4096;

bool in_range(unsigned char c, unsigned char lo, unsigned char hi) { return c >= lo && c <= hi; }

// Length of the well-formed UTF-8 sequence starting at `at`, or 0.
std::size_t valid_sequence_length(std::string_view bytes, std::size_t at) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(bytes[at + k]); };
    const unsigned char lead = byte(0);
    const std::size_t available = bytes.size() - at;
    if (in_range(lead, 0xC2, 0xDF)) {
        return available >= 2 && in_range(byte(1), 0x80, 0xBF) ? 2 : 0;
    }
    if (in_range(lead, 0xE0, 0xEF)) {
        if (available < 3) {
            return 0;
        }
        const unsigned char lo = lead == 0xE0 ? 0xA0 : 0x80;
        const unsigned char hi = lead == 0xED ? 0x9F : 0xBF;
        return in_range(byte(1), lo, hi) && in_range(byte(2), 0x80, 0xBF) ? 3 : 0;
    }
    if (in_range(lead, 0xF0, 0xF4)) {
        if (available < 4) {
            return 0;
        }
        const unsigned char lo = lead == 0xF0 ? 0x90 : 0x80;
        const unsigned char hi = lead == 0xF4 ? 0x8F : 0xBF;
        return in_range(byte(1), lo, hi) && in_range(byte(2), 0x80, 0xBF) && in_range(byte(3), 0x80, 0xBF) ? 4
                                                                                                            : 0;
    }
    return 0;
}

std::string lowercase(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

bool is_within(const fs::path& root, const fs::path& candidate) {
    auto r = root.begin();
    auto c = candidate.begin();
    for (; r != root.end(); ++r, ++c) {
        if (c == candidate.end() || *r != *c) {
            return false;
        }
    }
    return true;
}

std::optional<std::string> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        return std::nullopt;
    }
    return std::move(buffer).str();
}

std::string read_text_file(const fs::path& path) {
    return read_bytes(path).value_or(std::string{});
}

void sort_files(std::vector<SourceFile>& files) {
    std::sort(files.begin(), files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.relative_path < b.relative_path; });
}

std::vector<std::string> split_command(std::string_view command) {
    std::vector<std::string> words;
    std::istringstream in{std::string(command)};
    for (std::string word; in >> word;) {
        words.push_back(word);
    }
    return words;
}

std::string replace_once(std::string text, std::string_view placeholder, const std::string& value) {
    const std::size_t at = text.find(placeholder);
    if (at != std::string::npos) {
        text.replace(at, placeholder.size(), value);
    }
    return text;
}

std::size_t count_of(std::string_view text, std::string_view needle) {
    std::size_t count = 0;
    for (std::size_t at = text.find(needle); at != std::string_view::npos; at = text.find(needle, at + 1)) {
        ++count;
    }
    return count;
}

} // namespace

std::string decode_utf8_lossy(std::string_view bytes, bool& lossy, const simd::KernelTable& kernels) {
    lossy = false;
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        const std::size_t ascii = kernels.ascii_prefix(bytes.substr(i));
        out.append(bytes.substr(i, ascii));
        i += ascii;
        if (i == bytes.size()) {
            break;
        }
        if (const std::size_t length = valid_sequence_length(bytes, i); length > 0) {
            out.append(bytes.substr(i, length));
            i += length;
        } else {
            out.append(kReplacement);
            lossy = true;
            ++i;
        }
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view text, const simd::KernelTable& kernels) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t brk = kernels.find_line_break(text, pos);
        if (brk == simd::npos) {
            lines.emplace_back(text.substr(pos));
            break;
        }
        lines.emplace_back(text.substr(pos, brk - pos));
        pos = brk + 1;
        if (text[brk] == '\r' && pos < text.size() && text[pos] == '\n') {
            ++pos;
        }
    }
    return lines;
}

bool looks_binary(std::string_view bytes, const simd::KernelTable& kernels) {
    return kernels.find_byte(bytes.substr(0, kBinarySniffBytes), '\0') != simd::npos;
}

const SourceFile* SourceTree::find(std::string_view relative_path) const {
    const auto it = std::lower_bound(files.begin(), files.end(), relative_path,
                                     [](const SourceFile& f, std::string_view p) { return f.relative_path < p; });
    if (it != files.end() && it->relative_path == relative_path) {
        return &*it;
    }
    return nullptr;
}

std::size_t SourceTree::line_count() const {
    std::size_t total = 0;
    for (const auto& file : files) {
        total += file.lines.size();
    }
    return total;
}

SourceTree open_source_tree(const fs::path& root, const IngestOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw IngestionError(IngestionError::Kind::not_a_directory, "not a directory: " + root.string());
    }
    const fs::path canonical_root = fs::canonical(root, ec);
    if (ec) {
        throw IngestionError(IngestionError::Kind::io, "cannot resolve " + root.string() + ": " + ec.message());
    }

    SourceTree tree;
    tree.root = canonical_root;
    const auto warn = [&](std::string message) { tree.warnings.push_back(std::move(message)); };

    fs::recursive_directory_iterator it(canonical_root, fs::directory_options::skip_permission_denied, ec);
    if (ec) {
        throw IngestionError(IngestionError::Kind::io, "cannot list " + root.string() + ": " + ec.message());
    }
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) {
            warn("enumeration error: " + ec.message());
            ec.clear();
            continue;
        }
        const fs::directory_entry& entry = *it;
        const fs::path& path = entry.path();
        const std::string relative = path.lexically_relative(canonical_root).generic_string();
        const std::string name = path.filename().string();

        fs::path target = path;
        if (entry.is_symlink(ec)) {
            target = fs::canonical(path, ec);
            if (ec) {
                warn("skipped dangling symlink: " + relative);
                ec.clear();
                continue;
            }
            if (!is_within(canonical_root, target)) {
                warn("skipped symlink leading outside the tree: " + relative);
                continue;
            }
            if (fs::is_directory(target, ec)) {
                continue;
            }
        } else if (entry.is_directory(ec)) {
            if (!name.empty() && name.front() == '.') {
                it.disable_recursion_pending();
            }
            continue;
        }
        if (!fs::is_regular_file(target, ec)) {
            continue;
        }
        if (options.extensions.count(lowercase(path.extension().string())) == 0) {
            continue;
        }
        const std::uintmax_t size = fs::file_size(target, ec);
        if (ec) {
            warn("cannot stat " + relative + ": " + ec.message());
            ec.clear();
            continue;
        }
        if (size > options.max_file_bytes) {
            warn("skipped oversized file (" + std::to_string(size) + " bytes): " + relative);
            continue;
        }
        auto bytes = read_bytes(target);
        if (!bytes) {
            warn("cannot read " + relative);
            continue;
        }
        if (looks_binary(*bytes)) {
            warn("skipped binary file: " + relative);
            continue;
        }
        SourceFile file;
        file.relative_path = relative;
        file.lines = split_lines(decode_utf8_lossy(*bytes, file.decode_lossy));
        tree.files.push_back(std::move(file));
    }
    sort_files(tree.files);
    return tree;
}

void DecompilerSpec::validate() const {
    if (count_of(command_template, "{apk}") != 1 || count_of(command_template, "{out}") != 1) {
        throw std::invalid_argument("decompiler command must contain {apk} and {out} exactly once: " +
                                    command_template);
    }
    if (timeout.count() <= 0) {
        throw std::invalid_argument("decompiler timeout must be positive");
    }
}

SourceTree extract_apk(const fs::path& apk, const fs::path& workdir, const DecompilerSpec& spec,
                       const IngestOptions& options) {
    spec.validate();
    auto bytes = read_bytes(apk);
    if (!bytes) {
        throw IngestionError(IngestionError::Kind::not_an_apk, "cannot read APK: " + apk.string());
    }
    if (!zip::has_zip_magic(*bytes)) {
        throw IngestionError(IngestionError::Kind::not_an_apk, "not a ZIP container: " + apk.string());
    }
    std::optional<zip::Archive> archive;
    try {
        archive.emplace(std::move(*bytes));
    } catch (const std::exception& e) {
        throw IngestionError(IngestionError::Kind::not_an_apk, apk.string() + ": " + e.what());
    }

    std::vector<std::string> warnings;
    if (!archive->contains("classes.dex")) {
        warnings.push_back("APK has no classes.dex entry: " + apk.string());
    }

    std::error_code ec;
    const fs::path unpacked = workdir / "unpacked";
    const fs::path decompiled = workdir / "decompiled";
    fs::remove_all(unpacked, ec);
    fs::remove_all(decompiled, ec);
    fs::create_directories(decompiled, ec);
    if (ec) {
        throw IngestionError(IngestionError::Kind::io, "cannot create " + decompiled.string() + ": " + ec.message());
    }

    // Step 1: packaged resources.
    try {
        auto report = zip::extract_all(*archive, unpacked);
        warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());
    } catch (const fs::filesystem_error& e) {
        throw IngestionError(IngestionError::Kind::io, e.what());
    }

    // Step 2: readable sources from the external decompiler.
    const std::string command = replace_once(replace_once(spec.command_template, "{apk}", fs::absolute(apk).string()),
                                             "{out}", fs::absolute(decompiled).string());
    const fs::path log_path = workdir / "decompiler.log";
    const fs::path stderr_path = workdir / "decompiler.stderr";
    ProcessResult result;
    try {
        result = run_process(split_command(command), log_path, stderr_path,
                             std::chrono::duration_cast<std::chrono::milliseconds>(spec.timeout));
    } catch (const std::system_error& e) {
        throw IngestionError(IngestionError::Kind::decompiler_failed, e.what(), e.what());
    }
    const std::string stderr_text = read_text_file(stderr_path);
    {
        std::ofstream log(log_path, std::ios::binary | std::ios::app);
        if (!stderr_text.empty()) {
            log << "--- stderr ---\n" << stderr_text;
        }
    }
    fs::remove(stderr_path, ec);

    if (result.timed_out) {
        throw IngestionError(IngestionError::Kind::decompiler_timeout,
                             "decompiler timed out after " + std::to_string(spec.timeout.count()) + " s",
                             stderr_text);
    }
    if (!result.exit_status || *result.exit_status != 0) {
        const std::string how = result.exit_status ? "exited with status " + std::to_string(*result.exit_status)
                                                   : "was killed by signal " + std::to_string(result.signal.value_or(0));
        throw IngestionError(IngestionError::Kind::decompiler_failed, "decompiler " + how,
                             stderr_text);
    }

    SourceTree tree;
    tree.root = fs::canonical(workdir, ec);
    if (ec) {
        tree.root = workdir;
    }
    tree.warnings = std::move(warnings);

    SourceTree sources = open_source_tree(decompiled, options);
    bool has_xml = false;
    for (auto& file : sources.files) {
        has_xml = has_xml || lowercase(fs::path(file.relative_path).extension().string()) == ".xml";
        file.relative_path = "decompiled/" + file.relative_path;
        tree.files.push_back(std::move(file));
    }
    tree.warnings.insert(tree.warnings.end(), sources.warnings.begin(), sources.warnings.end());

    if (!has_xml && options.extensions.count(".xml") != 0 && fs::is_directory(unpacked, ec)) {
        IngestOptions xml_only = options;
        xml_only.extensions = {".xml"};
        SourceTree resources = open_source_tree(unpacked, xml_only);
        for (auto& file : resources.files) {
            file.relative_path = "unpacked/" + file.relative_path;
            tree.files.push_back(std::move(file));
        }
        tree.warnings.insert(tree.warnings.end(), resources.warnings.begin(), resources.warnings.end());
    }
    sort_files(tree.files);
    return tree;
}

} // namespace hipaa
