#include <destrike/fetch.hpp>

#include <destrike/errors.hpp>
#include <destrike/imaging.hpp>
#include <destrike/zip.hpp>

#include "json_io.hpp"

#include <curl/curl.h>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>

namespace destrike {

namespace fs = std::filesystem;
using detail::json;

namespace {

struct CurlGlobal {
    CurlGlobal() { curl_global_init(CURL_GLOBAL_DEFAULT); }
    ~CurlGlobal() { curl_global_cleanup(); }
};

void ensure_curl() { static const CurlGlobal global; }

size_t append_to_string(char* data, size_t size, size_t count, void* user) {
    static_cast<std::string*>(user)->append(data, size * count);
    return size * count;
}

size_t append_to_file(char* data, size_t size, size_t count, void* user) {
    auto* out = static_cast<std::ofstream*>(user);
    out->write(data, static_cast<std::streamsize>(size * count));
    return *out ? size * count : 0;
}

void perform(const std::string& url, curl_write_callback write, void* sink) {
    ensure_curl();
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl) throw NetworkError("curl initialisation failed");
    std::array<char, CURL_ERROR_SIZE> err{};
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 20L);
    curl_easy_setopt(curl.get(), CURLOPT_USERAGENT, "destrike-fetch");
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, write);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, sink);
    curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, err.data());
    const CURLcode rc = curl_easy_perform(curl.get());
    if (rc != CURLE_OK) {
        throw NetworkError("request to " + url + " failed: " + (err[0] ? err.data() : curl_easy_strerror(rc)));
    }
}

std::string normalize(std::string s) {
    std::string out;
    for (char ch : s) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
    }
    return out;
}

const KnownDataset& lookup(const std::string& name) {
    for (const KnownDataset& d : known_datasets()) {
        if (normalize(d.name) == normalize(name)) return d;
    }
    std::string msg = "unknown dataset '" + name + "'; known datasets:";
    for (const KnownDataset& d : known_datasets()) msg += "\n  " + d.name + "  " + d.description;
    throw ValidationError(msg);
}

std::optional<std::string> canonical_split(const std::string& dir_name) {
    const std::string n = normalize(dir_name);
    if (n == "train" || n == "training") return "train";
    if (n == "validation" || n == "val" || n == "valid") return "validation";
    if (n == "test" || n == "testing") return "test";
    for (int i = 0; i < 5; ++i) {
        if (n == std::to_string(i) || n == "partition" + std::to_string(i)) return partition_name(i);
    }
    return std::nullopt;
}

bool is_clean_dir(const std::string& name) {
    static const std::set<std::string> names = {"clean", "gt", "groundtruth", "structgt", "struckgt", "cleaned"};
    return names.contains(normalize(name));
}

// Copies every <split>/{struck, clean-like} directory pair found below the
// unpacked tree into <root>/<split>/{struck,clean}. Returns the split count.
int arrange_splits(const fs::path& unpacked, const fs::path& root) {
    int found = 0;
    for (auto it = fs::recursive_directory_iterator(unpacked); it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_directory()) continue;
        const auto split = canonical_split(it->path().filename().string());
        if (!split) continue;
        fs::path struck;
        fs::path clean;
        for (const auto& sub : fs::directory_iterator(it->path())) {
            if (!sub.is_directory()) continue;
            const std::string name = sub.path().filename().string();
            if (normalize(name) == "struck") struck = sub.path();
            if (is_clean_dir(name)) clean = sub.path();
        }
        if (struck.empty() || clean.empty()) continue;
        for (const auto& [src, kind] : {std::pair{struck, "struck"}, std::pair{clean, "clean"}}) {
            const fs::path dst = root / *split / kind;
            fs::create_directories(dst);
            for (const auto& f : fs::directory_iterator(src)) {
                if (f.is_regular_file() && f.path().extension() == ".png") {
                    fs::copy_file(f.path(), dst / f.path().filename(), fs::copy_options::overwrite_existing);
                }
            }
        }
        ++found;
        it.disable_recursion_pending();
    }
    return found;
}

}  // namespace

const std::vector<KnownDataset>& known_datasets() {
    static const std::vector<KnownDataset> datasets = {
        {"dracula-synth", "DraculaSynth: five synthetic partitions of the Dracula training words", "6406538",
         WriterMode::single_writer},
        {"dracula-real", "DraculaReal: genuine struck/clean Dracula word pairs (pass --record)", std::nullopt,
         WriterMode::single_writer},
        {"iam-strikethrough", "IAM words with synthetic strikethrough (pass --record)", std::nullopt,
         WriterMode::multi_writer},
    };
    return datasets;
}

std::string md5_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_md5(), nullptr) != 1) throw Error("MD5 initialisation failed");
    std::array<char, 1 << 16> chunk{};
    while (in) {
        in.read(chunk.data(), chunk.size());
        EVP_DigestUpdate(ctx.get(), chunk.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

std::string http_get(const std::string& url) {
    std::string body;
    perform(url, append_to_string, &body);
    return body;
}

void http_download(const std::string& url, const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    const fs::path tmp = file.string() + ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        perform(url, append_to_file, &out);
    }
    fs::rename(tmp, file);
}

FetchResult fetch_dataset(const FetchOptions& options) {
    const KnownDataset& known = lookup(options.dataset);
    const std::optional<std::string> record = options.record ? options.record : known.record;
    if (!record) {
        throw ValidationError("no Zenodo record is known for " + known.name + "; pass --record <id>");
    }
    const fs::path root = options.out_dir;
    const fs::path cache = root / ".cache" / *record;
    fs::create_directories(cache);

    const fs::path listing = cache / "record.json";
    FetchResult result;
    result.cache_hit = true;
    json meta;
    if (fs::exists(listing)) {
        meta = detail::read_json_file(listing);
    } else {
        result.cache_hit = false;
        const std::string url = options.api_base + "/records/" + *record;
        try {
            meta = json::parse(http_get(url));
        } catch (const json::parse_error& e) {
            throw FormatError("unexpected response from " + url + ": " + e.what());
        }
        detail::write_json_file(meta, listing);
    }

    const json files = meta.contains("files") ? meta.at("files") : json::array();
    if (files.empty()) throw FormatError("record " + *record + " lists no files");
    std::vector<fs::path> archives;
    for (const json& f : files) {
        const std::string key = f.at("key").get<std::string>();
        const std::string checksum = f.value("checksum", "");
        const std::string expected = checksum.rfind("md5:", 0) == 0 ? checksum.substr(4) : "";
        const fs::path local = cache / fs::path(key).filename();
        if (!fs::exists(local) || (!expected.empty() && md5_hex(local) != expected)) {
            result.cache_hit = false;
            std::string url;
            const json& links = f.at("links");
            url = links.contains("self") ? links.at("self").get<std::string>()
                                         : links.at("download").get<std::string>();
            http_download(url, local);
        }
        if (!expected.empty() && md5_hex(local) != expected) {
            fs::remove(local);
            throw ChecksumError("MD5 mismatch for " + key + " (expected " + expected + ")");
        }
        if (local.extension() == ".zip") archives.push_back(local);
    }

    const fs::path marker = cache / "unpacked";
    if (!result.cache_hit || !fs::exists(marker) || !fs::exists(root / kManifestFile)) {
        const fs::path unpacked = cache / "tree";
        fs::remove_all(unpacked);
        for (const fs::path& a : archives) extract_zip(a, unpacked);
        if (arrange_splits(unpacked, root) == 0) {
            throw FormatError("no <split>/{struck,clean} directories found in record " + *record);
        }
        std::ofstream(marker) << *record << '\n';
        result.manifest = build_manifest(root, known.name, known.writer_mode);
        save_manifest(result.manifest, root / kManifestFile);
    } else {
        result.manifest = load_manifest(root / kManifestFile);
    }
    result.root = root;
    result.counts = validate_counts(result.manifest);
    return result;
}

}  // namespace destrike
