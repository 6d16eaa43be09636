#include "internal_io.hpp"

#include <cstdio>
#include <fstream>
#include <unistd.h>

#include "sspd/errors.hpp"

namespace sspd::detail {

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.string().c_str());
            throw IoError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.string().c_str());
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() +
                      ": " + ec.message());
    }
}

} // namespace sspd::detail
