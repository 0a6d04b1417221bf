#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hipaa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CatalogError : public Error {
public:
    enum class Kind { parse, duplicate_id, empty_sub_rule };

    CatalogError(Kind kind, std::size_t line, const std::string& message)
        : Error("rules line " + std::to_string(line) + ": " + message), kind_(kind), line_(line) {}

    Kind kind() const noexcept { return kind_; }
    // 1-based line in the rules file.
    std::size_t line() const noexcept { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

class PatternError : public Error {
public:
    enum class Kind { empty_pattern, adjacent_wildcards, leading_or_trailing_wildcard };

    PatternError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class IngestionError : public Error {
public:
    enum class Kind { not_a_directory, io, not_an_apk, decompiler_failed, decompiler_timeout };

    IngestionError(Kind kind, const std::string& message, std::string detail = {})
        : Error(message), kind_(kind), detail_(std::move(detail)) {}

    Kind kind() const noexcept { return kind_; }
    // Captured decompiler stderr for decompiler_failed, empty otherwise.
    const std::string& detail() const noexcept { return detail_; }

private:
    Kind kind_;
    std::string detail_;
};

class ChecksumMismatch : public Error {
public:
    using Error::Error;
};

class ManifestError : public Error {
public:
    enum class Kind { bad_header, bad_row, duplicate_app_id };

    ManifestError(Kind kind, std::size_t row, const std::string& message)
        : Error("manifest row " + std::to_string(row) + ": " + message), kind_(kind), row_(row) {}

    Kind kind() const noexcept { return kind_; }
    // 1-based physical row, header included.
    std::size_t row() const noexcept { return row_; }

private:
    Kind kind_;
    std::size_t row_;
};

class CorpusError : public Error {
public:
    enum class Kind { empty_corpus, workdir_unwritable };

    CorpusError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

} // namespace hipaa
