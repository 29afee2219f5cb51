// Dataset ingestion and synthesis: the CIFAR-10 binary format, a raw-tensor
// container for externally preprocessed data, bilinear downsampling, and a
// Gaussian two-class image generator for desk-scale experiments.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnqe/rng.hpp"

namespace cnqe::data {

constexpr int kChannels = 3;
constexpr int kSide = 32;
constexpr size_t kPixels = size_t(kChannels) * kSide * kSide;

struct ImageRecord {
    std::vector<double> pixels;  // 3 x 32 x 32, row-major, [0, 1]
    int label = 0;               // 0 or 1
    std::string source_id;

    void check() const {
        if (pixels.size() != kPixels) throw std::invalid_argument("image must be 3x32x32");
        if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
        for (double p : pixels)
            if (p < 0.0 || p > 1.0 || !std::isfinite(p))
                throw std::invalid_argument("pixel outside [0, 1]");
    }
};

struct DatasetSplit {
    std::vector<ImageRecord> train;
    std::vector<ImageRecord> test;
    std::string class_names[2];

    void check() const {
        size_t per_class[2] = {0, 0};
        for (const auto& r : train) {
            r.check();
            ++per_class[r.label];
        }
        if (per_class[0] != per_class[1]) throw std::invalid_argument("train split must be class balanced");
        for (const auto& r : test) r.check();
        for (const auto& tr : train)
            for (const auto& te : test)
                if (tr.source_id == te.source_id)
                    throw std::invalid_argument("train/test share source id " + tr.source_id);
    }

    std::vector<std::vector<double>> train_images() const {
        std::vector<std::vector<double>> v;
        v.reserve(train.size());
        for (const auto& r : train) v.push_back(r.pixels);
        return v;
    }
    std::vector<int> train_labels() const {
        std::vector<int> v;
        v.reserve(train.size());
        for (const auto& r : train) v.push_back(r.label);
        return v;
    }
    std::vector<std::vector<double>> test_images() const {
        std::vector<std::vector<double>> v;
        v.reserve(test.size());
        for (const auto& r : test) v.push_back(r.pixels);
        return v;
    }
    std::vector<int> test_labels() const {
        std::vector<int> v;
        v.reserve(test.size());
        for (const auto& r : test) v.push_back(r.label);
        return v;
    }
};

// ---------------------------------------------------------------------------
// CIFAR-10 binary batches: 3073-byte records, 1 label byte + 3072 pixel bytes
// in R, G, B planes, row-major.
// ---------------------------------------------------------------------------

namespace detail {

constexpr size_t kCifarRecord = 3073;

inline const char* cifar_class_name(int cls) {
    static const char* names[10] = {"airplane", "automobile", "bird", "cat",   "deer",
                                    "dog",      "frog",       "horse", "ship", "truck"};
    return names[cls];
}

struct RawCifarImage {
    uint8_t label;
    std::vector<uint8_t> bytes;  // 3072
    std::string source_id;
};

inline std::vector<RawCifarImage> read_cifar_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.empty() || buf.size() % kCifarRecord != 0)
        throw std::runtime_error("malformed CIFAR-10 batch (size " + std::to_string(buf.size()) +
                                 " is not a multiple of 3073): " + file.string());
    std::vector<RawCifarImage> out;
    const size_t count = buf.size() / kCifarRecord;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        RawCifarImage img;
        const char* rec = buf.data() + i * kCifarRecord;
        img.label = uint8_t(rec[0]);
        img.bytes.assign(rec + 1, rec + kCifarRecord);
        img.source_id = file.filename().string() + ":" + std::to_string(i);
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace detail

// Loads a two-class subset: class_a maps to label 0, class_b to label 1,
// pixels scaled by 1/255, deterministic shuffled subsample of 400 train +
// 100 test images per class. `path` may be the batch directory itself or a
// parent containing cifar-10-batches-bin/.
inline DatasetSplit load_cifar10_pair(const std::string& path, int class_a, int class_b,
                                      uint64_t seed, int train_per_class = 400,
                                      int test_per_class = 100) {
    namespace fs = std::filesystem;
    if (class_a < 0 || class_a > 9 || class_b < 0 || class_b > 9 || class_a == class_b)
        throw std::invalid_argument("class indices must be distinct and in 0..9");

    fs::path dir(path);
    if (!fs::exists(dir / "data_batch_1.bin") && fs::exists(dir / "cifar-10-batches-bin"))
        dir /= "cifar-10-batches-bin";
    std::vector<fs::path> files;
    for (int i = 1; i <= 5; ++i) {
        const fs::path f = dir / ("data_batch_" + std::to_string(i) + ".bin");
        if (fs::exists(f)) files.push_back(f);
    }
    if (fs::exists(dir / "test_batch.bin")) files.push_back(dir / "test_batch.bin");
    if (files.empty()) throw std::runtime_error("no CIFAR-10 batches found under " + path);

    std::vector<detail::RawCifarImage> pool;
    for (const auto& f : files)
        for (auto& img : detail::read_cifar_file(f))
            if (img.label == class_a || img.label == class_b) pool.push_back(std::move(img));

    std::vector<size_t> order(pool.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng::Stream stream = rng::Stream(seed).fork("cifar_subsample");
    stream.shuffle(order);

    const int want = train_per_class + test_per_class;
    DatasetSplit split;
    split.class_names[0] = detail::cifar_class_name(class_a);
    split.class_names[1] = detail::cifar_class_name(class_b);
    int taken[2] = {0, 0};
    for (size_t idx : order) {
        const auto& img = pool[idx];
        const int label = (img.label == class_b) ? 1 : 0;
        if (taken[label] >= want) continue;
        ImageRecord rec;
        rec.label = label;
        rec.source_id = img.source_id;
        rec.pixels.resize(kPixels);
        for (size_t i = 0; i < kPixels; ++i) rec.pixels[i] = double(img.bytes[i]) / 255.0;
        if (taken[label] < train_per_class)
            split.train.push_back(std::move(rec));
        else
            split.test.push_back(std::move(rec));
        ++taken[label];
    }
    if (taken[0] < want || taken[1] < want)
        throw std::runtime_error("not enough samples for the requested classes");
    split.check();
    return split;
}

// ---------------------------------------------------------------------------
// Separable bilinear downsampling with half-pixel centers.
// ---------------------------------------------------------------------------

inline std::vector<double> resize_bilinear(const std::vector<double>& image, int h, int w) {
    if (h < kSide || w < kSide) throw std::invalid_argument("resize_bilinear only downsamples to 32x32");
    if (image.size() != size_t(kChannels) * h * w) throw std::invalid_argument("image shape mismatch");
    if (h == kSide && w == kSide) return image;

    std::vector<double> out(kPixels);
    const double sy = double(h) / kSide, sx = double(w) / kSide;
    for (int c = 0; c < kChannels; ++c) {
        for (int y = 0; y < kSide; ++y) {
            const double fy = (y + 0.5) * sy - 0.5;
            const int y0 = std::clamp(int(std::floor(fy)), 0, h - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const double wy = std::clamp(fy - y0, 0.0, 1.0);
            for (int x = 0; x < kSide; ++x) {
                const double fx = (x + 0.5) * sx - 0.5;
                const int x0 = std::clamp(int(std::floor(fx)), 0, w - 1);
                const int x1 = std::min(x0 + 1, w - 1);
                const double wx = std::clamp(fx - x0, 0.0, 1.0);
                auto at = [&](int yy, int xx) { return image[(size_t(c) * h + yy) * w + xx]; };
                const double top = at(y0, x0) * (1 - wx) + at(y0, x1) * wx;
                const double bot = at(y1, x0) * (1 - wx) + at(y1, x1) * wx;
                out[(size_t(c) * kSide + y) * kSide + x] = top * (1 - wy) + bot * wy;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Raw tensor container: magic "CNQE1", u32 train and test counts (LE), one
// label byte per record (train block first), then f32 little-endian pixel
// planes per record in the same order.
// ---------------------------------------------------------------------------

inline void save_raw_tensor(const DatasetSplit& split, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write("CNQE1", 5);
    const uint32_t n_train = uint32_t(split.train.size()), n_test = uint32_t(split.test.size());
    auto write_u32 = [&](uint32_t v) {
        char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
        out.write(b, 4);
    };
    write_u32(n_train);
    write_u32(n_test);
    auto write_labels = [&](const std::vector<ImageRecord>& recs) {
        for (const auto& r : recs) {
            const char b = char(r.label);
            out.write(&b, 1);
        }
    };
    write_labels(split.train);
    write_labels(split.test);
    auto write_pixels = [&](const std::vector<ImageRecord>& recs) {
        for (const auto& r : recs)
            for (double p : r.pixels) {
                const float f = float(p);
                static_assert(sizeof(float) == 4);
                char b[4];
                std::memcpy(b, &f, 4);
                out.write(b, 4);
            }
    };
    write_pixels(split.train);
    write_pixels(split.test);
}

inline DatasetSplit load_raw_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[5];
    if (!in.read(magic, 5) || std::string(magic, 5) != "CNQE1")
        throw std::runtime_error("bad magic: not a CNQE1 raw tensor file: " + path);
    auto read_u32 = [&]() {
        unsigned char b[4];
        if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated header");
        return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
    };
    const uint32_t n_train = read_u32(), n_test = read_u32();
    const size_t total = size_t(n_train) + n_test;
    std::vector<uint8_t> labels(total);
    if (!in.read(reinterpret_cast<char*>(labels.data()), std::streamsize(total)))
        throw std::runtime_error("label block shorter than the declared counts");

    DatasetSplit split;
    auto read_record = [&](size_t index, bool is_train) {
        ImageRecord rec;
        rec.label = labels[index];
        rec.source_id = std::string("raw:") + std::to_string(index);
        rec.pixels.resize(kPixels);
        std::vector<char> buf(kPixels * 4);
        if (!in.read(buf.data(), std::streamsize(buf.size())))
            throw std::runtime_error("pixel block shorter than the declared counts");
        for (size_t i = 0; i < kPixels; ++i) {
            float f;
            std::memcpy(&f, buf.data() + i * 4, 4);
            rec.pixels[i] = double(f);
        }
        rec.check();
        (is_train ? split.train : split.test).push_back(std::move(rec));
    };
    for (size_t i = 0; i < n_train; ++i) read_record(i, true);
    for (size_t i = 0; i < n_test; ++i) read_record(n_train + i, false);
    char extra;
    if (in.read(&extra, 1)) throw std::runtime_error("trailing bytes after the declared records");
    split.class_names[0] = "class0";
    split.class_names[1] = "class1";
    split.check();
    return split;
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian class pair. The class means sit at +-(margin_sigma/2) *
// sigma along a fixed smooth unit pattern, with isotropic pixel noise sigma,
// so the projected class separation is margin_sigma standard deviations.
// ---------------------------------------------------------------------------

inline const std::vector<double>& blob_direction() {
    static const std::vector<double> u = [] {
        std::vector<double> v(kPixels);
        double nrm = 0.0;
        for (int c = 0; c < kChannels; ++c)
            for (int y = 0; y < kSide; ++y)
                for (int x = 0; x < kSide; ++x) {
                    const double val = std::cos(2.0 * M_PI * (y + 3.0 * c) / kSide) *
                                       std::sin(2.0 * M_PI * x / kSide + 0.7 * c);
                    v[(size_t(c) * kSide + y) * kSide + x] = val;
                    nrm += val * val;
                }
        nrm = std::sqrt(nrm);
        for (auto& val : v) val /= nrm;
        return v;
    }();
    return u;
}

inline DatasetSplit synthetic_blobs(int n_per_class, double margin_sigma, uint64_t seed) {
    if (margin_sigma < 0) throw std::invalid_argument("margin must be nonnegative");
    if (n_per_class < 4) throw std::invalid_argument("need at least 4 samples per class");
    constexpr double kSigma = 0.08;
    const auto& u = blob_direction();
    const int test_per_class = std::max(2, n_per_class / 4);

    DatasetSplit split;
    split.class_names[0] = "blob_minus";
    split.class_names[1] = "blob_plus";
    rng::Stream root(seed);
    int counter = 0;
    auto make = [&](int label, bool is_train, int index) {
        rng::Stream s = root.fork(is_train ? "train" : "test", uint64_t(label) * 1000003 + index);
        ImageRecord rec;
        rec.label = label;
        rec.source_id = "blob:" + std::to_string(counter++);
        rec.pixels.resize(kPixels);
        const double shift = (label == 1 ? 0.5 : -0.5) * margin_sigma * kSigma;
        for (size_t i = 0; i < kPixels; ++i) {
            const double v = 0.5 + shift * u[i] + kSigma * s.normal();
            rec.pixels[i] = std::clamp(v, 0.0, 1.0);
        }
        return rec;
    };
    for (int i = 0; i < n_per_class; ++i) {
        split.train.push_back(make(0, true, i));
        split.train.push_back(make(1, true, i));
    }
    for (int i = 0; i < test_per_class; ++i) {
        split.test.push_back(make(0, false, i));
        split.test.push_back(make(1, false, i));
    }
    split.check();
    return split;
}

// FNV-1a over the label byte and the f32 little-endian pixels; used by the
// dataset manifest to pin loader determinism.
inline uint64_t record_checksum(const ImageRecord& rec) {
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&](uint8_t byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    mix(uint8_t(rec.label));
    for (double p : rec.pixels) {
        const float f = float(p);
        uint8_t b[4];
        std::memcpy(b, &f, 4);
        for (int i = 0; i < 4; ++i) mix(b[i]);
    }
    return h;
}

inline uint64_t split_checksum(const DatasetSplit& split) {
    uint64_t h = 1469598103934665603ULL;
    auto mix64 = [&](uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= uint8_t(v >> (8 * i));
            h *= 1099511628211ULL;
        }
    };
    for (const auto& r : split.train) mix64(record_checksum(r));
    for (const auto& r : split.test) mix64(record_checksum(r));
    return h;
}

}  // namespace cnqe::data
