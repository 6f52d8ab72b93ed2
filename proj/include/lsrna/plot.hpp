#pragma once

#include <string>
#include <vector>

namespace lsrna::plot {

struct Series {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    float r = 0.8f, g = 0.2f, b = 0.2f;
};

// Bare-bones line chart written straight to PNG; enough for loss curves and
// sweep plots without pulling in a plotting stack.
void render_chart(const std::vector<Series>& series, const std::string& title,
                  const std::string& path, int width = 480, int height = 320);

}  // namespace lsrna::plot
