#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace arascan {

/// Non-fatal finding produced while decoding hostile input. Parsers collect
/// these instead of aborting; the scan surfaces them in the report.
struct Warning {
    std::string code;     // stable machine tag, e.g. "dex.checksum"
    std::string message;

    bool operator==(const Warning&) const = default;
};

using Warnings = std::vector<Warning>;

inline void warn(Warnings& sink, std::string code, std::string message)
{
    sink.push_back(Warning{std::move(code), std::move(message)});
}

struct MalformedArchive : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EntryDecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedManifest : std::runtime_error {
    MalformedManifest(const std::string& what, size_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          offset(offset) {}
    size_t offset;
};

struct MalformedDex : std::runtime_error {
    MalformedDex(const std::string& what, size_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          offset(offset) {}
    size_t offset;
};

struct MalformedBody : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedElf : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceFormatError : std::runtime_error {
    TraceFormatError(const std::string& what, size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
          line(line) {}
    size_t line;
};

struct EmptyFactBase : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyCorpus : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedVariant : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace arascan
