#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edsim {

// Writes content to path via a temp file + rename, so readers never observe
// partial files.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);
bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);

// Sorted list of regular files in dir whose names start with prefix.
std::vector<std::string> list_files(const std::string& dir, const std::string& prefix);

// FNV-1a 64 over raw bytes; used for stage manifests and staleness checks.
uint64_t fnv1a64(const std::string& bytes);

std::string format_double(double v, int precision);  // fixed, e.g. "%.6f"
std::string format_double_exact(double v);           // round-trips bit-exactly ("%.17g")

}  // namespace edsim
