#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "openattr/error.hpp"

namespace openattr {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io", "cannot open file for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail("io", "read failure: " + path.string());
  return std::move(buf).str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("io", "cannot open file for writing: " + path.string());
  out << content;
  if (!out) fail("io", "write failure: " + path.string());
}

// Strips a UTF-8 byte-order mark in place.
inline void strip_bom(std::string& text) {
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);
}

}  // namespace openattr
