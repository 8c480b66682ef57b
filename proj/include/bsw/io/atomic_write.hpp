#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "bsw/error.hpp"

namespace bsw {

// Write-to-temp-then-rename so a crash mid-write never leaves a truncated
// file behind; rename within one directory is atomic on POSIX.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorCode::IoError, "cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            fail(ErrorCode::IoError, "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        fail(ErrorCode::IoError,
             "cannot move '" + tmp.string() + "' to '" + path.string() + "': " +
                 ec.message());
}

}  // namespace bsw
