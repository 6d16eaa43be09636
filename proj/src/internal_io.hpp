#pragma once

#include <filesystem>
#include <string>

namespace sspd::detail {

/// Writes content to path atomically: a temp file in the same directory is
/// written, flushed, and renamed over the target. Throws IoError on failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace sspd::detail
