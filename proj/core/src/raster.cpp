#include "dispo/raster.hpp"

#include <algorithm>
#include <cmath>

namespace dispo {

namespace {

constexpr double kCell = 2.0 / Raster::kSize;

// Visits the pixel under every sample of a half-pixel-step walk along [a, b];
// identical geometry always yields the identical cell sequence.
template <class F>
void walk_segment(const Vec2& a, const Vec2& b, F&& visit) {
  double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * kCell))));
  for (int k = 0; k <= steps; ++k) {
    double t = static_cast<double>(k) / steps;
    double x = a[0] + t * (b[0] - a[0]);
    double y = a[1] + t * (b[1] - a[1]);
    visit(Raster::pixel(x), Raster::pixel(y));
  }
}

}  // namespace

int Raster::pixel(double v) {
  int i = static_cast<int>(std::floor((v + 1.0) / kCell));
  return std::clamp(i, 0, kSize - 1);
}

bool Raster::mark_cell(int ix, int iy) {
  if (ix < 0 || ix >= kSize || iy < 0 || iy >= kSize) return false;
  unsigned char& c = cells_[index(ix, iy)];
  if (c) return false;
  c = 1;
  ++marked_;
  return true;
}

void Raster::mark_block(int ix, int iy) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) mark_cell(ix + dx, iy + dy);
  }
}

void Raster::mark_point(const Vec2& p) { mark_block(pixel(p[0]), pixel(p[1])); }

void Raster::mark_segment(const Vec2& a, const Vec2& b) {
  walk_segment(a, b, [this](int ix, int iy) { mark_block(ix, iy); });
}

void Raster::mark_polyline(const std::vector<Vec2>& pts) {
  if (pts.empty()) return;
  mark_point(pts[0]);
  for (size_t i = 1; i < pts.size(); ++i) mark_segment(pts[i - 1], pts[i]);
}

double iou(const Raster& a, const Raster& b) {
  long inter = 0, uni = 0;
  for (int iy = 0; iy < Raster::kSize; ++iy) {
    for (int ix = 0; ix < Raster::kSize; ++ix) {
      bool ia = a.test(ix, iy);
      bool ib = b.test(ix, iy);
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

IouTracker::IouTracker(Raster target) : target_(std::move(target)) {}

double IouTracker::iou() const {
  long uni = target_.count() + drawn_.count() - inter_;
  return uni ? static_cast<double>(inter_) / static_cast<double>(uni) : 0.0;
}

void IouTracker::add_point(const Vec2& p) {
  auto mark = [this](int ix, int iy) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (drawn_.mark_cell(ix + dx, iy + dy) && target_.test(ix + dx, iy + dy)) ++inter_;
      }
    }
  };
  if (!has_prev_) {
    mark(Raster::pixel(p[0]), Raster::pixel(p[1]));
    has_prev_ = true;
  } else {
    walk_segment(prev_, p, mark);
  }
  prev_ = p;
  iou_max_ = std::max(iou_max_, iou());
}

std::pair<double, double> iou_score(const std::vector<Vec2>& path, const Raster& target) {
  if (path.empty()) return {0.0, 0.0};
  IouTracker tr(target);
  for (const Vec2& p : path) tr.add_point(p);
  return {tr.iou(), tr.iou_max()};
}

}  // namespace dispo
