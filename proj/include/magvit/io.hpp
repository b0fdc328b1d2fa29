#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "magvit/tokenizer.hpp"

namespace magvit {

// Video file ("MGV1"): magic, version u8, dtype u8 (0 = f32), ndim u8 (= 4),
// dims as u32 little-endian (T, H, W, C), then the row-major f32 payload.
void save_video(const VideoTensor& video, const std::filesystem::path& path);
VideoTensor load_video(const std::filesystem::path& path);

// Token file ("MGT1"): magic, version u8, dims as u32 (t, h, w), payload u16.
void save_tokens(const TokenLattice& tokens, const std::filesystem::path& path);
TokenLattice load_tokens(const std::filesystem::path& path);

// Flat `key = value` config with `#` comments and `[section]` headers, no
// nesting. Keys are addressed as "section.key"; keys before any header have
// no prefix.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    double get_real(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace magvit
