#pragma once

#include <string>

#include "demoforge/model.hpp"

namespace demoforge {

struct IoError : Error {
    using Error::Error;
};

// Writes to a sibling temp file and renames it into place, so readers never
// observe a half-written file. Throws IoError on any failure.
void write_file_atomic(const std::string& path, const std::string& content);

// Reads a whole file; transparently inflates gzip when the path ends in .gz
// (or the content starts with the gzip magic). Throws IoError.
std::string read_file(const std::string& path);

// Atomic like write_file_atomic, but gzip-compresses when the path ends in
// .gz. Compression output is deterministic for identical content.
void write_file_maybe_gzip(const std::string& path, const std::string& content);

}  // namespace demoforge
