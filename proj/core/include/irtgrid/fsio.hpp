#pragma once

#include <string>

namespace irtgrid {

/// Reads an entire file; throws ParseError when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes content to a temporary sibling file, then renames it over path.
/// A failed write never leaves a partial file at path.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace irtgrid
