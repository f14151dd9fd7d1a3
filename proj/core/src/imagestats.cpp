#include "vlcurate/imagestats.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "imageio.hpp"

namespace vlcurate {

namespace {

std::vector<std::uint8_t> read_raw_pixels(const InlineImage& img, const std::string& sample_id) {
    std::ifstream in(img.pixels_path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("sample '" + sample_id + "': cannot open pixel buffer " + img.pixels_path);
    }
    const std::size_t expected =
        static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    std::vector<std::uint8_t> pixels(expected);
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(expected));
    if (static_cast<std::size_t>(in.gcount()) != expected || in.peek() != EOF) {
        throw std::runtime_error("sample '" + sample_id + "': pixel buffer size mismatch in " +
                                 img.pixels_path);
    }
    return pixels;
}

double density(const DatasetManifest& dataset, const CountOracle* oracle, CountKind kind,
               const char* metric) {
    if (dataset.samples.empty()) throw std::runtime_error(std::string(metric) + ": empty dataset");
    double sum = 0.0;
    for (const auto& s : dataset.samples) {
        std::optional<std::int64_t> count = kind == CountKind::ocr_tokens
                                                ? s.annotations.ocr_token_count
                                                : s.annotations.object_count;
        if (!count && oracle) count = oracle->count(s);
        if (!count) {
            throw std::runtime_error("sample '" + s.id + "': no " + metric +
                                     " count annotation and no oracle");
        }
        const auto [w, h] = image_dims(s);
        const double area = static_cast<double>(w) * static_cast<double>(h);
        if (area <= 0) throw std::runtime_error("sample '" + s.id + "': zero-area image");
        sum += static_cast<double>(*count) / area;
    }
    return sum / static_cast<double>(dataset.samples.size());
}

}  // namespace

GrayImage load_gray_image(const Sample& sample) {
    if (const auto* ref = std::get_if<ImageFileRef>(&sample.image)) {
        try {
            auto decoded = imageio::decode_gray(ref->path);
            return GrayImage{decoded.width, decoded.height, std::move(decoded.gray)};
        } catch (const std::exception& e) {
            throw std::runtime_error("sample '" + sample.id + "': " + e.what());
        }
    }
    if (const auto* inl = std::get_if<InlineImage>(&sample.image)) {
        if (inl->width <= 0 || inl->height <= 0) {
            throw std::runtime_error("sample '" + sample.id + "': non-positive image dimensions");
        }
        if (!inl->pixels.empty()) {
            const std::size_t expected =
                static_cast<std::size_t>(inl->width) * static_cast<std::size_t>(inl->height);
            if (inl->pixels.size() != expected) {
                throw std::runtime_error("sample '" + sample.id + "': pixel buffer size mismatch");
            }
            return GrayImage{inl->width, inl->height, inl->pixels};
        }
        if (!inl->pixels_path.empty()) {
            return GrayImage{inl->width, inl->height, read_raw_pixels(*inl, sample.id)};
        }
        throw std::runtime_error("sample '" + sample.id + "': inline image has no pixels");
    }
    throw std::runtime_error("sample '" + sample.id + "': no image");
}

std::pair<int, int> image_dims(const Sample& sample) {
    if (const auto* ref = std::get_if<ImageFileRef>(&sample.image)) {
        try {
            return imageio::probe_dims(ref->path);
        } catch (const std::exception& e) {
            throw std::runtime_error("sample '" + sample.id + "': " + e.what());
        }
    }
    if (const auto* inl = std::get_if<InlineImage>(&sample.image)) {
        return {inl->width, inl->height};
    }
    throw std::runtime_error("sample '" + sample.id + "': no image");
}

double image_entropy(const GrayImage& img, int levels) {
    if (img.pixels.empty()) throw std::runtime_error("image_entropy: empty pixel grid");
    if (levels < 2 || levels > 256) throw std::runtime_error("image_entropy: levels out of range");

    std::vector<std::size_t> histogram(static_cast<std::size_t>(levels), 0);
    for (const std::uint8_t p : img.pixels) {
        if (p >= levels) throw std::runtime_error("image_entropy: intensity outside [0, levels)");
        ++histogram[p];
    }
    const double total = static_cast<double>(img.pixels.size());
    double entropy = 0.0;
    for (const std::size_t count : histogram) {
        if (count == 0) continue;
        const double q = static_cast<double>(count) / total;
        entropy -= q * std::log2(q);
    }
    return entropy;
}

double avg_entropy(const DatasetManifest& dataset) {
    if (dataset.samples.empty()) throw std::runtime_error("avg_entropy: empty dataset");
    double sum = 0.0;
    for (const auto& s : dataset.samples) {
        sum += image_entropy(load_gray_image(s));
    }
    return sum / static_cast<double>(dataset.samples.size());
}

double text_density(const DatasetManifest& dataset, const CountOracle* ocr) {
    return density(dataset, ocr, CountKind::ocr_tokens, "text density");
}

double object_density(const DatasetManifest& dataset, const CountOracle* detector) {
    return density(dataset, detector, CountKind::objects, "object density");
}

double image_score(double norm_entropy, double norm_text_density, double norm_object_density) {
    for (const double v : {norm_entropy, norm_text_density, norm_object_density}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::runtime_error("image_score: normalized input outside [0,1]");
        }
    }
    return (norm_entropy + norm_text_density + norm_object_density) / 3.0;
}

ImageMetrics image_metrics(const DatasetManifest& dataset, const CountOracle* ocr,
                           const CountOracle* detector) {
    ImageMetrics metrics;
    metrics.avg_entropy = avg_entropy(dataset);
    metrics.avg_text_density = text_density(dataset, ocr);
    metrics.avg_object_density = object_density(dataset, detector);
    metrics.n = dataset.samples.size();
    if (metrics.avg_entropy < 0.0 || metrics.avg_entropy > 8.0) {
        throw std::runtime_error("image metrics violate their bounds");
    }
    return metrics;
}

}  // namespace vlcurate
