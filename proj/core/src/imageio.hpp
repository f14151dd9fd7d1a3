#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vlcurate::imageio {

struct DecodedImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> gray;  // row-major, integer luma for color inputs
};

// Sniffs PNG/JPEG magic bytes and decodes to 8-bit grayscale.
// Throws on unsupported formats or decode failures.
DecodedImage decode_gray(const std::string& path);

// Reads only the header: (width, height) without decoding pixel data.
std::pair<int, int> probe_dims(const std::string& path);

}  // namespace vlcurate::imageio
