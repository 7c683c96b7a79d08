#include <destrike/zip.hpp>

#include <destrike/errors.hpp>

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace destrike {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kLocalHeader = 0x04034b50;

std::uint16_t u16(const std::string& b, std::size_t at) {
    if (at + 2 > b.size()) throw FormatError("zip: truncated archive");
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t u32(const std::string& b, std::size_t at) {
    return static_cast<std::uint32_t>(u16(b, at)) | (static_cast<std::uint32_t>(u16(b, at + 2)) << 16);
}

std::string inflate_raw(const char* data, std::size_t size, std::size_t expected) {
    std::string out(expected, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw FormatError("zip: inflateInit failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != expected) throw FormatError("zip: corrupt deflate stream");
    return out;
}

fs::path safe_join(const fs::path& root, const std::string& name) {
    const fs::path rel = fs::path(name).lexically_normal();
    if (rel.is_absolute() || rel.empty() || *rel.begin() == "..") {
        throw FormatError("zip: entry '" + name + "' escapes the extraction directory");
    }
    return root / rel;
}

}  // namespace

std::vector<fs::path> extract_zip(const fs::path& archive, const fs::path& out_dir) {
    std::ifstream in(archive, std::ios::binary);
    if (!in) throw IoError("cannot open " + archive.string());
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 22) throw FormatError("zip: " + archive.string() + " is too small");

    std::size_t eocd = std::string::npos;
    const std::size_t lowest = buf.size() > 22 + 65535 ? buf.size() - 22 - 65535 : 0;
    for (std::size_t at = buf.size() - 22 + 1; at-- > lowest;) {
        if (u32(buf, at) == kEndOfCentralDir) {
            eocd = at;
            break;
        }
    }
    if (eocd == std::string::npos) throw FormatError("zip: no central directory in " + archive.string());
    const std::size_t entries = u16(buf, eocd + 10);
    std::size_t at = u32(buf, eocd + 16);

    std::vector<fs::path> written;
    for (std::size_t e = 0; e < entries; ++e) {
        if (u32(buf, at) != kCentralHeader) throw FormatError("zip: bad central directory entry");
        const std::uint16_t flags = u16(buf, at + 8);
        const std::uint16_t method = u16(buf, at + 10);
        const std::uint32_t crc = u32(buf, at + 16);
        const std::uint32_t packed = u32(buf, at + 20);
        const std::uint32_t unpacked = u32(buf, at + 24);
        const std::uint16_t name_len = u16(buf, at + 28);
        const std::uint16_t extra_len = u16(buf, at + 30);
        const std::uint16_t comment_len = u16(buf, at + 32);
        const std::uint32_t local = u32(buf, at + 42);
        if (at + 46 + name_len > buf.size()) throw FormatError("zip: truncated archive");
        const std::string name = buf.substr(at + 46, name_len);
        at += 46u + name_len + extra_len + comment_len;

        if (flags & 0x1) throw FormatError("zip: encrypted entry " + name);
        if (packed == 0xFFFFFFFFu || unpacked == 0xFFFFFFFFu) throw FormatError("zip: zip64 entry " + name);
        const fs::path target = safe_join(out_dir, name);
        if (!name.empty() && name.back() == '/') {
            fs::create_directories(target);
            continue;
        }
        if (u32(buf, local) != kLocalHeader) throw FormatError("zip: bad local header for " + name);
        const std::size_t data = local + 30u + u16(buf, local + 26) + u16(buf, local + 28);
        if (data + packed > buf.size()) throw FormatError("zip: truncated data for " + name);

        std::string content;
        if (method == 0) {
            content = buf.substr(data, packed);
        } else if (method == 8) {
            content = inflate_raw(buf.data() + data, packed, unpacked);
        } else {
            throw FormatError("zip: unsupported compression method " + std::to_string(method) + " for " + name);
        }
        const auto actual = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(content.data()),
                                  static_cast<uInt>(content.size()));
        if (actual != crc) throw ChecksumError("zip: CRC mismatch for " + name);

        fs::create_directories(target.parent_path());
        std::ofstream out(target, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + target.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        written.push_back(target);
    }
    return written;
}

}  // namespace destrike
