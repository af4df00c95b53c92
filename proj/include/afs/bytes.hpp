#pragma once

#include "afs/error.hpp"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace afs {

inline std::vector<unsigned char> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw DataError("cannot read " + path);
    return bytes;
}

// Writes through a temporary file and renames it into place, so a failed
// write never leaves a partial artifact at the destination.
inline void write_binary_file_atomic(const std::string& path,
                                     const std::vector<unsigned char>& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("cannot write " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw DataError("cannot move " + tmp + " to " + path);
    }
}

inline void write_text_file_atomic(const std::string& path, const std::string& text) {
    write_binary_file_atomic(path, std::vector<unsigned char>(text.begin(), text.end()));
}

} // namespace afs
