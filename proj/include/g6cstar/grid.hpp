#pragma once

// Product grids with uniform trapezoid quadrature.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace g6cstar {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct WindowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Axis {
  double lo = 0, hi = 1;
  int n = 4;

  double step() const { return (hi - lo) / (n - 1); }
  double point(int i) const { return lo + i * step(); }
  double weight(int i) const {
    return step() * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
  }
};

struct Grid {
  std::vector<Axis> axes;
  std::size_t max_points = 2u << 20;  // memory budget guard

  Grid() = default;
  explicit Grid(std::vector<Axis> ax, std::size_t budget = 2u << 20)
      : axes(std::move(ax)), max_points(budget) {
    validate();
  }

  void validate() const {
    std::size_t total = 1;
    for (const auto& a : axes) {
      if (a.n < 4) throw ConfigError("grid: need at least 4 points per axis");
      if (!(a.lo < a.hi)) throw ConfigError("grid: axis bounds must satisfy lo < hi");
      total *= static_cast<std::size_t>(a.n);
    }
    if (total > max_points) throw ConfigError("grid: total points exceed budget");
  }

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const {
    std::size_t total = 1;
    for (const auto& a : axes) total *= static_cast<std::size_t>(a.n);
    return total;
  }

  /// Flat-index decomposition, row-major over the axes.
  void unflatten(std::size_t idx, int* out) const {
    for (int d = dim() - 1; d >= 0; --d) {
      out[d] = static_cast<int>(idx % axes[d].n);
      idx /= axes[d].n;
    }
  }
  std::size_t flatten(const int* ij) const {
    std::size_t idx = 0;
    for (int d = 0; d < dim(); ++d) idx = idx * axes[d].n + ij[d];
    return idx;
  }

  std::vector<double> weights() const {
    std::vector<double> w(size(), 1.0);
    std::vector<int> ij(dim());
    for (std::size_t i = 0; i < size(); ++i) {
      unflatten(i, ij.data());
      double v = 1.0;
      for (int d = 0; d < dim(); ++d) v *= axes[d].weight(ij[d]);
      w[i] = v;
    }
    return w;
  }

  /// Grid with every axis refined to twice the point count (same window).
  Grid refined() const {
    Grid g = *this;
    g.max_points = max_points * 8 + 64;
    for (auto& a : g.axes) a.n = 2 * a.n;
    return g;
  }
};

}  // namespace g6cstar
