#pragma once

#include <functional>
#include <optional>

#include "types.hpp"

namespace spshape {

// Uniform Cartesian grid over a box, with an optional cell mask selecting the
// computational domain D. Fields are cell-centered; centers sit at (i+1/2)h.
// All types here are immutable after construction.
struct GridDomain {
  int dim = 2;                      // 2 or 3
  std::array<double, 3> extent{};  // physical side lengths; extent[2]=0 in 2D
  std::array<int, 3> cells{};      // cells per axis; cells[2]=1 in 2D
  double h = 0.0;                  // uniform spacing, h = extent[a]/cells[a]
  std::vector<uint8_t> mask;       // 1 = cell belongs to D

  int64_t cell_count() const {
    return int64_t(cells[0]) * cells[1] * cells[2];
  }
  int64_t index(int i, int j, int k = 0) const {
    return (int64_t(k) * cells[1] + j) * cells[0] + i;
  }
  void coords(int64_t id, int& i, int& j, int& k) const {
    i = int(id % cells[0]);
    j = int((id / cells[0]) % cells[1]);
    k = int(id / (int64_t(cells[0]) * cells[1]));
  }
  Point center(int64_t id) const {
    int i, j, k;
    coords(id, i, j, k);
    return {(i + 0.5) * h, (j + 0.5) * h, dim == 3 ? (k + 0.5) * h : 0.0};
  }
  bool in_mask(int64_t id) const { return mask[size_t(id)] != 0; }
  int64_t active_count() const;
  double cell_volume() const;      // h^dim
  double total_measure() const;    // h^dim * active cells
};

using DomainPtr = std::shared_ptr<const GridDomain>;

// Per-cell density in [0,1] for one phase; zero on masked-out cells.
struct PhaseField {
  DomainPtr domain;
  std::vector<double> values;
  int phase_id = 0;
};

// Binarized set of cells; support is always a subset of the domain mask.
struct IndicatorSet {
  DomainPtr domain;
  std::vector<uint8_t> support;

  int64_t count() const;
};

enum class PerimeterMode { FaceCount, Smoothed };

DomainPtr build_domain(int dim, const std::array<double, 3>& extent,
                       const std::array<int, 3>& cells,
                       const std::function<bool(const Point&)>& mask_predicate = nullptr);

double measure(const IndicatorSet& set);
double measure_density(const PhaseField& phi);  // h^dim * sum(values)

IndicatorSet ball_cells(const DomainPtr& domain, const Point& center, double r);

// face_count: h^{d-1} times the number of faces between a set cell and a
// complement/exterior cell (L1-type, exact on axis-aligned rectangles).
// smoothed: |grad| of the Gaussian-mollified indicator, sigma = 2h
// (isotropy-corrected estimate). Empty set returns 0 and raises the flag.
double perimeter(const IndicatorSet& set, PerimeterMode mode,
                 bool* empty_warning = nullptr);

double density_ratio(const IndicatorSet& set, const Point& x0, double r);

// Outer-ring measure-theoretic boundary proxy: cells of the set that have a
// face neighbor in the complement (masked-out and out-of-box cells count).
IndicatorSet boundary_cells(const IndicatorSet& set);

IndicatorSet dilate(const IndicatorSet& set, int steps);
IndicatorSet binarize_field(const PhaseField& phi, double threshold);
IndicatorSet set_difference(const IndicatorSet& a, const IndicatorSet& b);
IndicatorSet set_intersection(const IndicatorSet& a, const IndicatorSet& b);

}  // namespace spshape
