#pragma once

#include <string>

#include "lsrna/tensor.hpp"

namespace lsrna {

// 8-bit PNG I/O. Values map [0,1] <-> [0,255] with round-to-nearest.
RgbImage read_png(const std::string& path);
void write_png(const std::string& path, const RgbImage& img);

// Grayscale export for edge/density visualizations (1-channel tensor).
void write_png_gray(const std::string& path, const Tensor& map);

}  // namespace lsrna
