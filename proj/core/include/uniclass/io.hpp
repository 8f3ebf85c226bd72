#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "uniclass/errors.hpp"
#include "uniclass/sequence.hpp"

namespace uniclass {

// Writes via a sibling temp file plus rename so readers never observe a
// partially written file.
inline void write_file_atomic(const std::string& path,
                              const std::string& bytes) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

// Sequence files are raw, one byte per symbol.
inline Sequence read_sequence_file(const std::string& path,
                                   Alphabet alphabet) {
  std::string bytes = read_file(path);
  std::vector<Symbol> data(bytes.begin(), bytes.end());
  return Sequence(alphabet, std::move(data));
}

inline void write_sequence_file(const std::string& path, const Sequence& x) {
  std::string bytes(x.data().begin(), x.data().end());
  write_file_atomic(path, bytes);
}

}  // namespace uniclass
