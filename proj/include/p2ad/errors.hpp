#pragma once

#include <stdexcept>
#include <string>

namespace p2ad {

// Violated precondition or invariant of a library call.
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// File that could not be opened, read, or written.
class FileError : public std::runtime_error {
public:
    explicit FileError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally invalid serialized data. The kind distinguishes a wrong
// magic from a wrong version from a short read, so callers (and tests)
// can tell which corruption they hit.
class FormatError : public std::runtime_error {
public:
    enum class Kind { bad_magic, bad_version, truncated, corrupt };

    FormatError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

}  // namespace p2ad
