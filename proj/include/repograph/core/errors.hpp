#pragma once

#include <stdexcept>
#include <string>

namespace repograph {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Repository contains no file the frontend accepts.
struct EmptyCorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Persisted artifact is truncated, corrupt, or from another format version.
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Network failure talking to a remote backend; callers may retry.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cursor position outside the file.
struct CursorError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

}  // namespace repograph
