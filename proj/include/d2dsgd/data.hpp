#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "d2dsgd/linalg.hpp"

namespace d2dsgd {

struct Dataset {
    int feature_dim = 0;
    int num_classes = 0;
    Vec features;            // flat, sample i at [i*feature_dim, (i+1)*feature_dim)
    std::vector<int> labels;

    int size() const { return static_cast<int>(labels.size()); }
    const double* sample(int i) const { return features.data() + static_cast<std::size_t>(i) * feature_dim; }
};

// Big-endian IDX pair (images + labels), pixels scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Gaussian blobs around per-class centroids. Centroids are drawn from the
// seed and pushed apart until the closest pair sits at least 4*spread away,
// so classes stay linearly separable at moderate spread.
Dataset synth_dataset(std::uint64_t seed, int classes, int dim, int n_per_class, double spread);

// First `first_n` samples of each class go to the first dataset, the rest to
// the second. Used to carve a test split that shares the class geometry.
std::pair<Dataset, Dataset> split_per_class(const Dataset& data, int first_n);

struct PartitionSpec {
    std::vector<std::vector<int>> excluded;  // per device, ascending class ids
    std::vector<std::vector<int>> indices;   // per device, sample indices
};

// Class-exclusion non-IID split: each device drops 2-4 uniformly chosen
// classes and draws an equal number of samples per remaining class (round
// robin distributes the remainder, lowest class index first), without
// replacement within the device and independently across devices.
PartitionSpec partition_noniid(std::uint64_t seed, const Dataset& data, int num_devices,
                               int samples_per_device);

}  // namespace d2dsgd
