#pragma once

#include <vector>

#include "segstitch/consensus.hpp"
#include "segstitch/scene.hpp"

namespace segstitch::test {

/// Stack with one instance per box: weight value inside the integer box
/// [y0, y1) x [x0, x1), mixed like the forward model.
struct RectObject {
  int y0, x0, y1, x1;
  double value = 0.95;
};

inline MixingStack rect_stack(int height, int width, const std::vector<RectObject>& objects) {
  std::vector<Array2D<double>> planes;
  for (const auto& o : objects) {
    Array2D<double> p(height, width, 0.0);
    for (int y = o.y0; y < o.y1; ++y)
      for (int x = o.x0; x < o.x1; ++x) p(y, x) = o.value;
    planes.push_back(std::move(p));
  }
  return mix(planes, height, width);
}

/// Random sparse weighted graph over n nodes (every node gets at least one edge).
inline EdgeList random_graph(int n, double density, Rng& rng) {
  EdgeList g;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform01(rng) < density || j == i + 1) g.push_back({static_cast<std::uint32_t>(i),
                                                               static_cast<std::uint32_t>(j), 0.05 + uniform01(rng)});
  return g;
}

}  // namespace segstitch::test
