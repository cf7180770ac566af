#pragma once

#include <filesystem>
#include <string_view>

namespace semiper {

/// Writes to a sibling temp file, flushes, then renames over `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace semiper
