#include "grid.hpp"

#include <algorithm>
#include <cmath>

namespace spshape {

int64_t GridDomain::active_count() const {
  int64_t n = 0;
  for (uint8_t m : mask) n += m;
  return n;
}

double GridDomain::cell_volume() const {
  double v = h * h;
  if (dim == 3) v *= h;
  return v;
}

double GridDomain::total_measure() const {
  return cell_volume() * double(active_count());
}

int64_t IndicatorSet::count() const {
  int64_t n = 0;
  for (uint8_t s : support) n += s;
  return n;
}

DomainPtr build_domain(int dim, const std::array<double, 3>& extent,
                       const std::array<int, 3>& cells,
                       const std::function<bool(const Point&)>& mask_predicate) {
  if (dim != 2 && dim != 3)
    throw ConfigError("domain.dim must be 2 or 3, got " + std::to_string(dim));
  auto dom = std::make_shared<GridDomain>();
  dom->dim = dim;
  dom->extent = extent;
  dom->cells = cells;
  if (dim == 2) {
    dom->extent[2] = 0.0;
    dom->cells[2] = 1;
  }
  for (int a = 0; a < dim; ++a) {
    if (!(extent[a] > 0.0))
      throw ConfigError("domain.extent must be positive on every axis");
    if (cells[a] < 4)
      throw ConfigError("domain.cells must be >= 4 per axis");
  }
  const double h = extent[0] / cells[0];
  for (int a = 1; a < dim; ++a) {
    const double ha = extent[a] / cells[a];
    if (std::abs(ha - h) > 1e-12 * h)
      throw ConfigError("domain spacing must be uniform across axes (extent/cells mismatch)");
  }
  dom->h = h;
  dom->mask.assign(size_t(dom->cell_count()), 1);
  if (mask_predicate) {
    for (int64_t id = 0; id < dom->cell_count(); ++id)
      dom->mask[size_t(id)] = mask_predicate(dom->center(id)) ? 1 : 0;
  }
  return dom;
}

double measure(const IndicatorSet& set) {
  return set.domain->cell_volume() * double(set.count());
}

double measure_density(const PhaseField& phi) {
  double s = 0.0;
  for (double v : phi.values) s += v;
  return phi.domain->cell_volume() * s;
}

IndicatorSet ball_cells(const DomainPtr& domain, const Point& center, double r) {
  if (r < domain->h)
    throw DomainError("ball_cells: radius " + std::to_string(r) +
                      " below grid spacing " + std::to_string(domain->h));
  IndicatorSet out{domain, std::vector<uint8_t>(size_t(domain->cell_count()), 0)};
  const double r2 = r * r;
  for (int64_t id = 0; id < domain->cell_count(); ++id) {
    if (!domain->in_mask(id)) continue;
    const Point c = domain->center(id);
    double d2 = sq(c[0] - center[0]) + sq(c[1] - center[1]);
    if (domain->dim == 3) d2 += sq(c[2] - center[2]);
    if (d2 <= r2) out.support[size_t(id)] = 1;
  }
  return out;
}

namespace {

// Visits every (cell in set, face neighbor) pair; neighbor id is -1 for
// out-of-box neighbors.
template <typename F>
void for_each_face(const IndicatorSet& set, F&& f) {
  const GridDomain& d = *set.domain;
  const int nx = d.cells[0], ny = d.cells[1], nz = d.cells[2];
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    if (!set.support[size_t(id)]) continue;
    int i, j, k;
    d.coords(id, i, j, k);
    const int di[6] = {1, -1, 0, 0, 0, 0};
    const int dj[6] = {0, 0, 1, -1, 0, 0};
    const int dk[6] = {0, 0, 0, 0, 1, -1};
    const int nf = d.dim == 3 ? 6 : 4;
    for (int q = 0; q < nf; ++q) {
      const int ni = i + di[q], nj = j + dj[q], nk = k + dk[q];
      int64_t nid = -1;
      if (ni >= 0 && ni < nx && nj >= 0 && nj < ny && nk >= 0 && nk < nz)
        nid = d.index(ni, nj, nk);
      f(id, nid);
    }
  }
}

double smoothed_perimeter(const IndicatorSet& set) {
  const GridDomain& d = *set.domain;
  const double h = d.h;
  const double sigma = 2.0 * h;
  const int rad = int(std::ceil(4.0 * sigma / h));
  std::vector<double> kern(2 * rad + 1);
  double ksum = 0.0;
  for (int t = -rad; t <= rad; ++t) {
    kern[size_t(t + rad)] = std::exp(-0.5 * sq(t * h / sigma));
    ksum += kern[size_t(t + rad)];
  }
  for (double& v : kern) v /= ksum;

  const int nx = d.cells[0], ny = d.cells[1], nz = d.cells[2];
  std::vector<double> a(set.support.begin(), set.support.end());
  std::vector<double> b(a.size(), 0.0);
  // separable convolution; the indicator is extended by zero outside the box
  auto convolve_axis = [&](const std::vector<double>& src, std::vector<double>& dst,
                           int axis) {
    const int n[3] = {nx, ny, nz};
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          double acc = 0.0;
          for (int t = -rad; t <= rad; ++t) {
            int c[3] = {i, j, k};
            c[axis] += t;
            if (c[axis] < 0 || c[axis] >= n[axis]) continue;
            acc += kern[size_t(t + rad)] * src[size_t(d.index(c[0], c[1], c[2]))];
          }
          dst[size_t(d.index(i, j, k))] = acc;
        }
  };
  convolve_axis(a, b, 0);
  convolve_axis(b, a, 1);
  if (d.dim == 3) {
    convolve_axis(a, b, 2);
    std::swap(a, b);
  }

  auto at = [&](int i, int j, int k) -> double {
    if (i < 0 || i >= nx || j < 0 || j >= ny || k < 0 || k >= nz) return 0.0;
    return a[size_t(d.index(i, j, k))];
  };
  double total = 0.0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double gx = (at(i + 1, j, k) - at(i - 1, j, k)) / (2 * h);
        const double gy = (at(i, j + 1, k) - at(i, j - 1, k)) / (2 * h);
        double g2 = gx * gx + gy * gy;
        if (d.dim == 3) g2 += sq((at(i, j, k + 1) - at(i, j, k - 1)) / (2 * h));
        total += std::sqrt(g2);
      }
  return total * d.cell_volume();
}

}  // namespace

double perimeter(const IndicatorSet& set, PerimeterMode mode, bool* empty_warning) {
  if (empty_warning) *empty_warning = false;
  if (set.count() == 0) {
    if (empty_warning) *empty_warning = true;
    return 0.0;
  }
  if (mode == PerimeterMode::Smoothed) return smoothed_perimeter(set);
  int64_t faces = 0;
  for_each_face(set, [&](int64_t, int64_t nid) {
    if (nid < 0 || !set.support[size_t(nid)]) ++faces;
  });
  const GridDomain& d = *set.domain;
  const double hface = d.dim == 3 ? d.h * d.h : d.h;
  return hface * double(faces);
}

double density_ratio(const IndicatorSet& set, const Point& x0, double r) {
  if (r < 2.0 * set.domain->h)
    throw DomainError("density_ratio: radius must be >= 2h");
  IndicatorSet ball = ball_cells(set.domain, x0, r);
  const int64_t nball = ball.count();
  if (nball == 0) throw DomainError("density_ratio: ball lies outside the domain mask");
  int64_t inter = 0;
  for (size_t id = 0; id < ball.support.size(); ++id)
    if (ball.support[id] && set.support[id]) ++inter;
  return double(inter) / double(nball);
}

IndicatorSet boundary_cells(const IndicatorSet& set) {
  IndicatorSet out{set.domain, std::vector<uint8_t>(set.support.size(), 0)};
  for_each_face(set, [&](int64_t id, int64_t nid) {
    if (nid < 0 || !set.support[size_t(nid)]) out.support[size_t(id)] = 1;
  });
  return out;
}

IndicatorSet dilate(const IndicatorSet& set, int steps) {
  IndicatorSet cur = set;
  const GridDomain& d = *set.domain;
  const int nx = d.cells[0], ny = d.cells[1], nz = d.cells[2];
  for (int s = 0; s < steps; ++s) {
    IndicatorSet next = cur;
    for (int64_t id = 0; id < d.cell_count(); ++id) {
      if (!cur.support[size_t(id)]) continue;
      int i, j, k;
      d.coords(id, i, j, k);
      const int di[6] = {1, -1, 0, 0, 0, 0};
      const int dj[6] = {0, 0, 1, -1, 0, 0};
      const int dk[6] = {0, 0, 0, 0, 1, -1};
      const int nf = d.dim == 3 ? 6 : 4;
      for (int q = 0; q < nf; ++q) {
        const int ni = i + di[q], nj = j + dj[q], nk = k + dk[q];
        if (ni >= 0 && ni < nx && nj >= 0 && nj < ny && nk >= 0 && nk < nz)
          next.support[size_t(d.index(ni, nj, nk))] = 1;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

IndicatorSet binarize_field(const PhaseField& phi, double threshold) {
  IndicatorSet out{phi.domain, std::vector<uint8_t>(phi.values.size(), 0)};
  for (size_t id = 0; id < phi.values.size(); ++id)
    out.support[id] = phi.values[id] >= threshold ? 1 : 0;
  return out;
}

IndicatorSet set_difference(const IndicatorSet& a, const IndicatorSet& b) {
  IndicatorSet out = a;
  for (size_t id = 0; id < out.support.size(); ++id)
    if (b.support[id]) out.support[id] = 0;
  return out;
}

IndicatorSet set_intersection(const IndicatorSet& a, const IndicatorSet& b) {
  IndicatorSet out = a;
  for (size_t id = 0; id < out.support.size(); ++id)
    out.support[id] = out.support[id] && b.support[id];
  return out;
}

}  // namespace spshape
