#include "d2dsgd/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "d2dsgd/errors.hpp"
#include "d2dsgd/rng.hpp"

namespace d2dsgd {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off, const std::string& path) {
    if (off + 4 > b.size())
        throw FormatError("'" + path + "': truncated at byte offset " + std::to_string(b.size()));
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_file(images_path);
    const auto lab = read_file(labels_path);

    if (img.empty()) throw FormatError("'" + images_path + "': empty file at byte offset 0");
    if (lab.empty()) throw FormatError("'" + labels_path + "': empty file at byte offset 0");

    const std::uint32_t img_magic = be32(img, 0, images_path);
    if (img_magic != 0x00000803u)
        throw FormatError("'" + images_path + "': bad magic at byte offset 0 (expected 0x00000803)");
    const std::uint32_t lab_magic = be32(lab, 0, labels_path);
    if (lab_magic != 0x00000801u)
        throw FormatError("'" + labels_path + "': bad magic at byte offset 0 (expected 0x00000801)");

    const std::uint32_t n_img = be32(img, 4, images_path);
    const std::uint32_t rows = be32(img, 8, images_path);
    const std::uint32_t cols = be32(img, 12, images_path);
    const std::uint32_t n_lab = be32(lab, 4, labels_path);
    if (n_img != n_lab)
        throw FormatError("image count " + std::to_string(n_img) + " does not match label count " +
                          std::to_string(n_lab));

    const std::size_t pixels = std::size_t(n_img) * rows * cols;
    if (img.size() != 16 + pixels)
        throw FormatError("'" + images_path + "': truncated at byte offset " + std::to_string(img.size()) +
                          " (expected " + std::to_string(16 + pixels) + " bytes)");
    if (lab.size() != 8 + n_lab)
        throw FormatError("'" + labels_path + "': truncated at byte offset " + std::to_string(lab.size()) +
                          " (expected " + std::to_string(8 + n_lab) + " bytes)");

    Dataset d;
    d.feature_dim = static_cast<int>(rows * cols);
    d.features.resize(pixels);
    for (std::size_t i = 0; i < pixels; ++i) d.features[i] = img[16 + i] / 255.0;
    d.labels.resize(n_lab);
    int max_label = 0;
    for (std::uint32_t i = 0; i < n_lab; ++i) {
        d.labels[i] = lab[8 + i];
        max_label = std::max(max_label, d.labels[i]);
    }
    d.num_classes = max_label + 1;
    return d;
}

Dataset synth_dataset(std::uint64_t seed, int classes, int dim, int n_per_class, double spread) {
    if (classes < 2) throw ConfigError("synthetic dataset needs at least two classes");
    if (dim < 1) throw ConfigError("synthetic dataset needs a positive feature dimension");
    if (n_per_class < 1) throw ConfigError("need at least one sample per class");
    if (!(spread >= 0.0)) throw ConfigError("spread must be non-negative");

    Rng rng(derive_seed(seed, Stream::synth));

    std::vector<Vec> centroids(classes, Vec(dim));
    for (auto& c : centroids)
        for (double& x : c) x = rng.normal();

    double min_dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < classes; ++a)
        for (int b = a + 1; b < classes; ++b) {
            double s = 0.0;
            for (int f = 0; f < dim; ++f) {
                const double diff = centroids[a][f] - centroids[b][f];
                s += diff * diff;
            }
            min_dist = std::min(min_dist, std::sqrt(s));
        }
    if (!(min_dist > 1e-9)) throw NumericError("degenerate centroid draw");
    const double scale = std::max(1.0, 4.0 * spread / min_dist);
    for (auto& c : centroids)
        for (double& x : c) x *= scale;

    Dataset d;
    d.feature_dim = dim;
    d.num_classes = classes;
    d.features.resize(std::size_t(classes) * n_per_class * dim);
    d.labels.resize(std::size_t(classes) * n_per_class);
    std::size_t pos = 0;
    for (int c = 0; c < classes; ++c) {
        for (int n = 0; n < n_per_class; ++n) {
            const std::size_t s = pos / dim;
            d.labels[s] = c;
            for (int f = 0; f < dim; ++f) d.features[pos++] = centroids[c][f] + spread * rng.normal();
        }
    }
    return d;
}

std::pair<Dataset, Dataset> split_per_class(const Dataset& data, int first_n) {
    Dataset a, b;
    a.feature_dim = b.feature_dim = data.feature_dim;
    a.num_classes = b.num_classes = data.num_classes;
    std::vector<int> seen(data.num_classes, 0);
    for (int i = 0; i < data.size(); ++i) {
        Dataset& dst = (seen[data.labels[i]]++ < first_n) ? a : b;
        dst.labels.push_back(data.labels[i]);
        dst.features.insert(dst.features.end(), data.sample(i), data.sample(i) + data.feature_dim);
    }
    return {std::move(a), std::move(b)};
}

PartitionSpec partition_noniid(std::uint64_t seed, const Dataset& data, int num_devices,
                               int samples_per_device) {
    if (num_devices < 1) throw ConfigError("need at least one device");
    if (samples_per_device < 1) throw ConfigError("need at least one sample per device");
    const int c = data.num_classes;
    if (c < 5) throw ConfigError("class-exclusion partition needs at least five classes");

    std::vector<std::vector<int>> by_class(c);
    for (int i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);

    PartitionSpec spec;
    spec.excluded.resize(num_devices);
    spec.indices.resize(num_devices);

    for (int dev = 0; dev < num_devices; ++dev) {
        Rng rng(derive_seed(seed, Stream::partition, static_cast<std::uint64_t>(dev)));

        const int n_excl = 2 + static_cast<int>(rng.uniform_int(3));
        std::vector<int> classes(c);
        for (int i = 0; i < c; ++i) classes[i] = i;
        for (int i = 0; i < n_excl; ++i) {
            const int j = i + static_cast<int>(rng.uniform_int(c - i));
            std::swap(classes[i], classes[j]);
        }
        spec.excluded[dev].assign(classes.begin(), classes.begin() + n_excl);
        std::sort(spec.excluded[dev].begin(), spec.excluded[dev].end());

        std::vector<int> included(classes.begin() + n_excl, classes.end());
        std::sort(included.begin(), included.end());

        const int n_inc = static_cast<int>(included.size());
        const int base = samples_per_device / n_inc;
        const int rem = samples_per_device % n_inc;

        for (int pos = 0; pos < n_inc; ++pos) {
            const int cls = included[pos];
            const int want = base + (pos < rem ? 1 : 0);
            auto pool = by_class[cls];
            if (want > static_cast<int>(pool.size()))
                throw PartitionError("class " + std::to_string(cls) + " has " +
                                     std::to_string(pool.size()) + " samples but device " +
                                     std::to_string(dev) + " needs " + std::to_string(want));
            for (int i = 0; i < want; ++i) {
                const int j = i + static_cast<int>(rng.uniform_int(pool.size() - i));
                std::swap(pool[i], pool[j]);
                spec.indices[dev].push_back(pool[i]);
            }
        }
        std::sort(spec.indices[dev].begin(), spec.indices[dev].end());
    }
    return spec;
}

}  // namespace d2dsgd
