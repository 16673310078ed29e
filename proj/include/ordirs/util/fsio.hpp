#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ordirs/errors.hpp"

namespace ordirs::util {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes a file atomically: the content lands under a temporary name in the
/// same directory and is renamed over the target, so readers never observe a
/// partial artifact.
inline void atomic_write(const std::filesystem::path& path,
                         std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw InputError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace ordirs::util
