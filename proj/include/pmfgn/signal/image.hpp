#pragma once

#include <Eigen/Dense>

#include "pmfgn/corpus/types.hpp"

namespace pmfgn::signal {

// Normalized intensities plus the spatial grid the image encoder pools to:
// a grid_size x grid_size arrangement of square areas, row-major.
struct PatchGrid {
  static constexpr int kGridSize = 4;
  static constexpr int kAreaSize = corpus::kImageSize / kGridSize;

  Eigen::MatrixXd pixels;  // 64 x 64, values in [0, 1]

  static constexpr int area_count() { return kGridSize * kGridSize; }
  static constexpr int area_of(int row, int col) { return (row / kAreaSize) * kGridSize + col / kAreaSize; }
};

PatchGrid preprocess_image(const corpus::Image& image);

}  // namespace pmfgn::signal
