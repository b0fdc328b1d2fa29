#include "magvit/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "magvit/binio.hpp"

namespace magvit {

void save_video(const VideoTensor& video, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open video file for writing: " + path.string());
    binio::put_magic(os, "MGV1");
    binio::put_u8(os, 1);
    binio::put_u8(os, 0);  // dtype f32
    binio::put_u8(os, 4);
    binio::put_u32(os, static_cast<std::uint32_t>(video.dims.frames));
    binio::put_u32(os, static_cast<std::uint32_t>(video.dims.height));
    binio::put_u32(os, static_cast<std::uint32_t>(video.dims.width));
    binio::put_u32(os, static_cast<std::uint32_t>(video.dims.channels));
    for (double v : video.data) binio::put_f32(os, static_cast<float>(v));
    if (!os) throw IoError("failed writing video file: " + path.string());
}

VideoTensor load_video(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open video file: " + path.string());
    binio::expect_magic(is, "MGV1", "video");
    if (binio::get_u8(is, "video version") != 1) throw DataError("unsupported video version");
    if (binio::get_u8(is, "video dtype") != 0) throw DataError("unsupported video dtype");
    if (binio::get_u8(is, "video ndim") != 4) throw DataError("video ndim must be 4");
    const std::uint32_t t = binio::get_u32(is, "frames");
    const std::uint32_t h = binio::get_u32(is, "height");
    const std::uint32_t w = binio::get_u32(is, "width");
    const std::uint32_t c = binio::get_u32(is, "channels");
    if (t == 0 || h == 0 || w == 0 || c == 0) throw DataError("video has a zero axis");
    VideoTensor video(Dims3(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w),
                            static_cast<int>(c)));
    for (double& v : video.data) {
        const float f = binio::get_f32(is, "video payload");
        if (!std::isfinite(f)) throw DataError("non-finite pixel in video file");
        v = f;
    }
    return video;
}

void save_tokens(const TokenLattice& tokens, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open token file for writing: " + path.string());
    binio::put_magic(os, "MGT1");
    binio::put_u8(os, 1);
    binio::put_u32(os, static_cast<std::uint32_t>(tokens.latent.t));
    binio::put_u32(os, static_cast<std::uint32_t>(tokens.latent.h));
    binio::put_u32(os, static_cast<std::uint32_t>(tokens.latent.w));
    for (TokenId id : tokens.tokens) {
        if (id > 0xffff) throw DataError("token id does not fit the u16 payload");
        binio::put_u16(os, static_cast<std::uint16_t>(id));
    }
    if (!os) throw IoError("failed writing token file: " + path.string());
}

TokenLattice load_tokens(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open token file: " + path.string());
    binio::expect_magic(is, "MGT1", "token");
    if (binio::get_u8(is, "token version") != 1) throw DataError("unsupported token version");
    const std::uint32_t t = binio::get_u32(is, "latent t");
    const std::uint32_t h = binio::get_u32(is, "latent h");
    const std::uint32_t w = binio::get_u32(is, "latent w");
    if (t == 0 || h == 0 || w == 0) throw DataError("token lattice has a zero axis");
    TokenLattice out;
    out.latent = LatentDims(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w));
    out.tokens.resize(out.latent.count());
    for (TokenId& id : out.tokens) id = binio::get_u16(is, "token payload");
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("unterminated section header at line " +
                                  std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name at line " + std::to_string(lineno));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected `key = value` at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("empty key at line " + std::to_string(lineno));
        cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse(buf.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key \"" + key + "\"");
    return it->second;
}

long Config::get_int(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key \"" + key + "\" is not an integer: " + it->second);
    }
}

double Config::get_real(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key \"" + key + "\" is not a number: " + it->second);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key \"" + key + "\" is not a boolean: " + it->second);
}

} // namespace magvit
