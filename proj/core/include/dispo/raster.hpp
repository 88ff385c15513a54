#pragma once

#include <utility>
#include <vector>

#include "dispo/kinematics.hpp"

namespace dispo {

// 128x128 occupancy grid over the [-1,1]^2 workspace. Strokes are 3 pixels
// wide: every pixel the stroke passes through marks its 3x3 neighborhood.
class Raster {
 public:
  static constexpr int kSize = 128;

  Raster() : cells_(kSize * kSize, 0) {}

  void mark_point(const Vec2& p);
  void mark_segment(const Vec2& a, const Vec2& b);
  void mark_polyline(const std::vector<Vec2>& pts);

  bool test(int ix, int iy) const { return cells_[index(ix, iy)] != 0; }
  int count() const { return marked_; }

  static int pixel(double v);  // workspace coordinate -> cell index, clamped

 private:
  friend class IouTracker;
  static int index(int ix, int iy) { return iy * kSize + ix; }
  bool mark_cell(int ix, int iy);  // true when newly marked
  void mark_block(int ix, int iy);

  std::vector<unsigned char> cells_;
  int marked_ = 0;
};

double iou(const Raster& a, const Raster& b);

// Incremental drawn-path-vs-target IoU; add_point extends the path by one
// position (the first call just places the pen) and updates the running
// intersection so per-prefix scores are O(stroke length).
class IouTracker {
 public:
  explicit IouTracker(Raster target);

  void add_point(const Vec2& p);
  double iou() const;
  double iou_max() const { return iou_max_; }
  const Raster& target() const { return target_; }
  const Raster& drawn() const { return drawn_; }

 private:
  Raster target_;
  Raster drawn_;
  long inter_ = 0;
  double iou_max_ = 0.0;
  bool has_prev_ = false;
  Vec2 prev_{0.0, 0.0};
};

// (iou_last, iou_max over path prefixes); empty path scores (0, 0).
std::pair<double, double> iou_score(const std::vector<Vec2>& path, const Raster& target);

}  // namespace dispo
