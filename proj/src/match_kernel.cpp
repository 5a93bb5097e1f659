#include "rallykit/match_kernel.hpp"

#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#endif

namespace rallykit {

std::size_t argmin_feature_scalar(const FeatureSoa& features,
                                  const Eigen::Vector3d& q) {
    if (features.empty()) {
        throw std::invalid_argument("argmin_feature: empty feature set");
    }
    std::size_t best = 0;
    double best_d = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double dx = features.x[i] - q.x();
        const double dy = features.y[i] - q.y();
        const double dz = features.z[i] - q.z();
        const double d = dx * dx + dy * dy + dz * dz;
        if (i == 0 || d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

#if defined(__x86_64__) || defined(_M_X64)

__attribute__((target("avx2"))) std::size_t argmin_feature_avx2(
    const FeatureSoa& features, const Eigen::Vector3d& q) {
    if (features.empty()) {
        throw std::invalid_argument("argmin_feature: empty feature set");
    }
    const std::size_t n = features.size();
    const std::size_t n4 = n & ~std::size_t{3};

    std::size_t best = 0;
    double best_d = 0.0;
    bool have_best = false;

    if (n4 > 0) {
        const __m256d qx = _mm256_set1_pd(q.x());
        const __m256d qy = _mm256_set1_pd(q.y());
        const __m256d qz = _mm256_set1_pd(q.z());
        __m256d lane_best = _mm256_set1_pd(__builtin_huge_val());
        // Per-lane best indices as doubles; n is far below 2^53.
        __m256d lane_idx = _mm256_setzero_pd();
        for (std::size_t i = 0; i < n4; i += 4) {
            const __m256d dx =
                _mm256_sub_pd(_mm256_loadu_pd(&features.x[i]), qx);
            const __m256d dy =
                _mm256_sub_pd(_mm256_loadu_pd(&features.y[i]), qy);
            const __m256d dz =
                _mm256_sub_pd(_mm256_loadu_pd(&features.z[i]), qz);
            const __m256d d = _mm256_add_pd(
                _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                _mm256_mul_pd(dz, dz));
            const __m256d lt = _mm256_cmp_pd(d, lane_best, _CMP_LT_OQ);
            lane_best = _mm256_blendv_pd(lane_best, d, lt);
            const __m256d idx = _mm256_set_pd(
                static_cast<double>(i + 3), static_cast<double>(i + 2),
                static_cast<double>(i + 1), static_cast<double>(i));
            lane_idx = _mm256_blendv_pd(lane_idx, idx, lt);
        }
        alignas(32) double d_out[4];
        alignas(32) double i_out[4];
        _mm256_store_pd(d_out, lane_best);
        _mm256_store_pd(i_out, lane_idx);
        // Cross-lane reduction: strict less keeps the lower lane, and on
        // equal distances the lower index wins.
        for (int lane = 0; lane < 4; ++lane) {
            const auto idx = static_cast<std::size_t>(i_out[lane]);
            if (!have_best || d_out[lane] < best_d ||
                (d_out[lane] == best_d && idx < best)) {
                have_best = true;
                best_d = d_out[lane];
                best = idx;
            }
        }
    }
    for (std::size_t i = n4; i < n; ++i) {
        const double dx = features.x[i] - q.x();
        const double dy = features.y[i] - q.y();
        const double dz = features.z[i] - q.z();
        const double d = dx * dx + dy * dy + dz * dz;
        if (!have_best || d < best_d) {
            have_best = true;
            best_d = d;
            best = i;
        }
    }
    return best;
}

namespace {
bool avx2_available() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
}
const bool kUseAvx2 = avx2_available();
}  // namespace

std::size_t argmin_feature(const FeatureSoa& features,
                           const Eigen::Vector3d& q) {
    if (kUseAvx2) return argmin_feature_avx2(features, q);
    return argmin_feature_scalar(features, q);
}

const char* argmin_kernel_name() { return kUseAvx2 ? "avx2" : "scalar"; }

#else

std::size_t argmin_feature(const FeatureSoa& features,
                           const Eigen::Vector3d& q) {
    return argmin_feature_scalar(features, q);
}

const char* argmin_kernel_name() { return "scalar"; }

#endif

}  // namespace rallykit
