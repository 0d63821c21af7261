#pragma once

#include "fdreg/rng.hpp"
#include "fdreg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

namespace testutil {

// Relative disagreement with a floor so near-zero pairs compare on absolute
// terms instead of blowing up. The floor sits above the resolution of a
// central difference at h = 1e-5 on O(1) values (~1e-10 rounding noise):
// derivatives that are exactly zero — e.g. a conv bias erased by train-mode
// batchnorm — read pure probe noise and must not count as disagreement.
inline double rel_error(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-5});
    return std::abs(a - b) / scale;
}

inline double max_rel_error(const fdreg::Tensor& a, const fdreg::Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i)
        worst = std::max(worst, rel_error(a.data[i], b.data[i]));
    return worst;
}

// Self-cleaning scratch directory for files a test writes and reads back.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0;; ++attempt) {
            auto candidate =
                base / ("fdreg_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(attempt));
            if (std::filesystem::create_directory(candidate)) {
                path = candidate;
                return;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

}  // namespace testutil
