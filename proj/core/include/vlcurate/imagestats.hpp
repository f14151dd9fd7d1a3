#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vlcurate/manifest.hpp"
#include "vlcurate/oracles.hpp"

namespace vlcurate {

/// 8-bit grayscale image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

/// Loads a sample's image as grayscale: PNG/JPEG file refs are decoded and
/// converted via rounded integer luma (0.299 R + 0.587 G + 0.114 B); inline
/// buffers come from memory or the raw pixels_path file. Throws, naming the
/// sample, when the image is missing or undecodable.
GrayImage load_gray_image(const Sample& sample);

/// (width, height) of the original image, without full decode where possible.
std::pair<int, int> image_dims(const Sample& sample);

/// Shannon entropy in bits of the intensity histogram with `levels` bins.
/// 0 for a constant image, log2(levels) for a uniform histogram.
double image_entropy(const GrayImage& img, int levels = 256);

/// The three visual complexity metrics of one dataset.
struct ImageMetrics {
    double avg_entropy = 0.0;         ///< mean per-image entropy, [0,8] bits
    double avg_text_density = 0.0;    ///< mean OCR tokens per pixel
    double avg_object_density = 0.0;  ///< mean detected objects per pixel
    std::size_t n = 0;
};

/// Mean per-image entropy over the dataset.
double avg_entropy(const DatasetManifest& dataset);

/// Mean OCR-token density: per sample, count / (original width * height).
/// Annotation wins over the oracle; missing counts or zero-area images throw.
double text_density(const DatasetManifest& dataset, const CountOracle* ocr = nullptr);

/// Mean object density; same contract as text_density with object counts.
double object_density(const DatasetManifest& dataset, const CountOracle* detector = nullptr);

/// Arithmetic mean of the three normalized image metrics; inputs must be in [0,1].
double image_score(double norm_entropy, double norm_text_density, double norm_object_density);

/// All three raw image metrics of one dataset, invariants checked.
ImageMetrics image_metrics(const DatasetManifest& dataset, const CountOracle* ocr = nullptr,
                           const CountOracle* detector = nullptr);

}  // namespace vlcurate
