#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace rallykit {

// Structure-of-arrays feature store for the nearest-neighbor scan.
struct FeatureSoa {
    std::vector<double> x, y, z;

    std::size_t size() const { return x.size(); }
    bool empty() const { return x.empty(); }
    void push_back(const Eigen::Vector3d& f) {
        x.push_back(f.x());
        y.push_back(f.y());
        z.push_back(f.z());
    }
    Eigen::Vector3d at(std::size_t i) const { return {x[i], y[i], z[i]}; }
};

// Index of the feature with minimal squared Euclidean distance to q; ties
// resolve to the lowest index.  Throws std::invalid_argument when empty.
// The scalar and AVX2 kernels evaluate dx*dx + dy*dy + dz*dz in the same
// operation order (no fused multiply-add), so their results are
// bit-identical and the dispatched kernel is exactly equivalent to the
// scalar reference.
std::size_t argmin_feature_scalar(const FeatureSoa& features,
                                  const Eigen::Vector3d& q);
std::size_t argmin_feature(const FeatureSoa& features,
                           const Eigen::Vector3d& q);

#if defined(__x86_64__) || defined(_M_X64)
std::size_t argmin_feature_avx2(const FeatureSoa& features,
                                const Eigen::Vector3d& q);
#endif

// Name of the kernel argmin_feature dispatches to on this machine.
const char* argmin_kernel_name();

}  // namespace rallykit
