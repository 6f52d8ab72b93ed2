#pragma once

#include "lsrna/tensor.hpp"

namespace lsrna {

// Separable Keys bicubic (a = -0.5), edge-clamped. Used for latent
// upsampling baselines and RGB degradation.
Tensor resize_bicubic(const Tensor& src, int out_h, int out_w);

// Separable Lanczos-3, edge-clamped. Used by the patch-metric reference
// preparation path.
Tensor resize_lanczos3(const Tensor& src, int out_h, int out_w);

// Exact area average: each output cell is the rectangle-overlap weighted
// mean of input cells. Handles non-integer ratios. Requires out <= in.
Tensor resize_area(const Tensor& src, int out_h, int out_w);

Tensor resize_nearest(const Tensor& src, int out_h, int out_w);

}  // namespace lsrna
