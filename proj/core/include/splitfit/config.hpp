#pragma once

#include <cstdint>
#include <vector>

namespace splitfit {

/// Pipeline-wide parameters. Defaults match the published thresholds; the
/// detector threshold is resolution-dependent and resolved via detect_tau().
struct Config {
    int r = 256;                 ///< grid resolution (voxels per axis)
    int patch_stride = 16;       ///< s
    int patch_size = 32;         ///< k
    double eps1 = 0.001;         ///< fitting threshold
    double eps2 = 0.02;          ///< surface-adjacency threshold
    double eps3 = 0.05;          ///< curve-adjacency threshold
    double tau = 0.0;            ///< third-derivative threshold; 0 = auto (0.5/h^2)
    std::vector<double> match_thresholds = {0.1, 0.05, 0.02, 0.01, 0.005};
    int threads = 0;             ///< 0 = hardware concurrency
    std::uint64_t seed = 0;      ///< base seed for the RANSAC fallback

    double spacing() const { return 1.0 / r; }

    /// Effective detector threshold: a crease (gradient flip) produces a
    /// third-difference on the order of 1/h^2 while smooth quadrics stay
    /// orders of magnitude below; 0.5/h^2 separates the two.
    double detect_tau() const {
        if (tau > 0.0) return tau;
        const double h = spacing();
        return 0.5 / (h * h);
    }

    bool valid() const {
        return r > 0 && patch_stride > 0 && patch_stride <= patch_size &&
               eps1 > 0 && eps1 < eps2 && eps2 < eps3;
    }
};

}  // namespace splitfit
