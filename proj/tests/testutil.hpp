#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "vlcurate/imagestats.hpp"
#include "vlcurate/manifest.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "vlcurate_test") {
        static std::atomic<unsigned> counter{0};
        const auto stamp = std::to_string(
            std::chrono::steady_clock::now().time_since_epoch().count());
        path_ = fs::temp_directory_path() /
                (tag + "_" + stamp + "_" + std::to_string(counter.fetch_add(1)));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline vlcurate::Sample make_sample(std::string id, std::string prompt, std::string response) {
    vlcurate::Sample s;
    s.id = std::move(id);
    s.prompt = std::move(prompt);
    s.response = std::move(response);
    return s;
}

inline vlcurate::DatasetManifest make_manifest(std::string name,
                                               std::vector<vlcurate::Sample> samples) {
    vlcurate::DatasetManifest m;
    m.name = std::move(name);
    m.samples = std::move(samples);
    return m;
}

inline vlcurate::InlineImage inline_image(int width, int height,
                                          std::vector<std::uint8_t> pixels) {
    vlcurate::InlineImage img;
    img.width = width;
    img.height = height;
    img.pixels = std::move(pixels);
    return img;
}

inline vlcurate::InlineImage constant_image(int width, int height, std::uint8_t value) {
    return inline_image(width, height,
                        std::vector<std::uint8_t>(
                            static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                            value));
}

// 16x16 image holding each intensity level exactly once: 8 bits of entropy.
inline vlcurate::InlineImage full_range_image() {
    std::vector<std::uint8_t> pixels(256);
    for (int i = 0; i < 256; ++i) pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    return inline_image(16, 16, std::move(pixels));
}

}  // namespace testutil
