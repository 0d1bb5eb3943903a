#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "faultloc/raster.hpp"

namespace faultloc {

enum class ReductionKind { Global, PerRow, PerColumn, Block };

struct ReductionMode {
    ReductionKind kind = ReductionKind::PerColumn;
    int block_k = 8;  // grid side for Block

    static ReductionMode global() { return {ReductionKind::Global, 0}; }
    static ReductionMode per_row() { return {ReductionKind::PerRow, 0}; }
    static ReductionMode per_column() { return {ReductionKind::PerColumn, 0}; }
    static ReductionMode block(int k) {
        if (k < 1) throw std::invalid_argument("reduction: block k must be >= 1");
        return {ReductionKind::Block, k};
    }

    std::string name() const {
        switch (kind) {
            case ReductionKind::Global: return "global";
            case ReductionKind::PerRow: return "perrow";
            case ReductionKind::PerColumn: return "percolumn";
            case ReductionKind::Block: return "block" + std::to_string(block_k);
        }
        return "?";
    }

    static ReductionMode parse(const std::string& s) {
        if (s == "global") return global();
        if (s == "perrow") return per_row();
        if (s == "percolumn") return per_column();
        if (s.rfind("block", 0) == 0 && s.size() > 5) return block(std::stoi(s.substr(5)));
        throw std::invalid_argument("reduction: unknown mode '" + s + "'");
    }

    std::size_t feature_count(int height, int width) const {
        switch (kind) {
            case ReductionKind::Global: return 2;
            case ReductionKind::PerRow: return 2 * static_cast<std::size_t>(height);
            case ReductionKind::PerColumn: return 2 * static_cast<std::size_t>(width);
            case ReductionKind::Block: return 2 * static_cast<std::size_t>(block_k) * block_k;
        }
        return 0;
    }
};

struct FeatureVector {
    std::vector<double> values;  // all region means, then all region stds
    ReductionMode layout;
};

namespace detail {

struct Region {
    int row0, row1, col0, col1;  // half-open
};

/// Two-pass mean / population std over the region, fixed row-major traversal
/// so results are bit-stable.
inline void region_stats(const NormalizedImage& img, const Region& rg, double& mean, double& stdev) {
    const std::size_t count =
        static_cast<std::size_t>(rg.row1 - rg.row0) * static_cast<std::size_t>(rg.col1 - rg.col0);
    double sum = 0.0;
    for (int r = rg.row0; r < rg.row1; ++r)
        for (int c = rg.col0; c < rg.col1; ++c) sum += img.at(r, c);
    mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (int r = rg.row0; r < rg.row1; ++r)
        for (int c = rg.col0; c < rg.col1; ++c) {
            const double d = img.at(r, c) - mean;
            ss += d * d;
        }
    stdev = std::sqrt(ss / static_cast<double>(count));
}

}  // namespace detail

/// Statistical reduction of a normalized image: per-region arithmetic mean
/// and population standard deviation, regions per the mode.
inline FeatureVector reduce(const NormalizedImage& img, const ReductionMode& mode) {
    if (img.height <= 0 || img.width <= 0) throw std::invalid_argument("reduce: empty image");

    std::vector<detail::Region> regions;
    switch (mode.kind) {
        case ReductionKind::Global:
            regions.push_back({0, img.height, 0, img.width});
            break;
        case ReductionKind::PerRow:
            for (int r = 0; r < img.height; ++r) regions.push_back({r, r + 1, 0, img.width});
            break;
        case ReductionKind::PerColumn:
            for (int c = 0; c < img.width; ++c) regions.push_back({0, img.height, c, c + 1});
            break;
        case ReductionKind::Block: {
            const int k = mode.block_k;
            if (k > img.height || k > img.width)
                throw std::invalid_argument("reduce: block grid finer than the image");
            auto edge = [](int extent, int k_, int i) { return static_cast<int>(static_cast<long long>(extent) * i / k_); };
            for (int br = 0; br < k; ++br)
                for (int bc = 0; bc < k; ++bc)
                    regions.push_back({edge(img.height, k, br), edge(img.height, k, br + 1),
                                       edge(img.width, k, bc), edge(img.width, k, bc + 1)});
            break;
        }
    }

    FeatureVector fv;
    fv.layout = mode;
    fv.values.resize(2 * regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i) {
        double mean = 0.0, stdev = 0.0;
        detail::region_stats(img, regions[i], mean, stdev);
        fv.values[i] = mean;
        fv.values[regions.size() + i] = stdev;
    }
    return fv;
}

}  // namespace faultloc
