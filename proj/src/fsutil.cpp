#include "demoforge/fsutil.hpp"

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace demoforge {

namespace {

bool looks_gzipped(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

void rename_into_place(const std::string& tmp, const std::string& path) {
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot move temp file onto " + path + ": " + ec.message());
    }
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to " + tmp);
    }
    rename_into_place(tmp, path);
}

std::string read_file(const std::string& path) {
    {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) throw IoError("cannot open " + path);
        char magic[2] = {0, 0};
        probe.read(magic, 2);
        const bool gzipped = probe.gcount() == 2 && static_cast<unsigned char>(magic[0]) == 0x1F &&
                             static_cast<unsigned char>(magic[1]) == 0x8B;
        if (!gzipped) {
            probe.seekg(0);
            std::ostringstream buf;
            buf << probe.rdbuf();
            return buf.str();
        }
    }
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw IoError("cannot open " + path);
    std::string out;
    char chunk[1 << 16];
    for (;;) {
        const int n = gzread(gz, chunk, sizeof chunk);
        if (n < 0) {
            gzclose(gz);
            throw IoError("gzip read failed on " + path);
        }
        if (n == 0) break;
        out.append(chunk, static_cast<std::size_t>(n));
    }
    gzclose(gz);
    return out;
}

void write_file_maybe_gzip(const std::string& path, const std::string& content) {
    if (!looks_gzipped(path)) {
        write_file_atomic(path, content);
        return;
    }
    const std::string tmp = path + ".tmp";
    // Fixed compression settings and a zeroed timestamp keep the bytes
    // reproducible for identical content.
    gzFile gz = gzopen(tmp.c_str(), "wb9");
    if (!gz) throw IoError("cannot open " + tmp + " for writing");
    std::size_t off = 0;
    while (off < content.size()) {
        const unsigned n =
            static_cast<unsigned>(std::min<std::size_t>(content.size() - off, 1u << 20));
        if (gzwrite(gz, content.data() + off, n) != static_cast<int>(n)) {
            gzclose(gz);
            std::filesystem::remove(tmp);
            throw IoError("gzip write failed on " + tmp);
        }
        off += n;
    }
    if (gzclose(gz) != Z_OK) {
        std::filesystem::remove(tmp);
        throw IoError("gzip close failed on " + tmp);
    }
    rename_into_place(tmp, path);
}

}  // namespace demoforge
