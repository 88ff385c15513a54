#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "dispo/tensor.hpp"

namespace dispo {

// Gradient buffers keyed by tensor identity. Buffers are created zero-filled
// on first write, so backward rules can accumulate unconditionally.
class GradStore {
 public:
  std::vector<double>& acc(const TensorData* node);
  const std::vector<double>* find(const TensorData* node) const;
  void clear() { bufs_.clear(); }

 private:
  std::unordered_map<const TensorData*, std::vector<double>> bufs_;
};

// Record of one reverse-mode step. `pull` reads the output gradient(s) from
// the store and accumulates input gradients back into it.
struct TapeOp {
  const char* kind;
  std::function<void(GradStore&)> pull;
};

// Ordered log of primitive operations. Ops are recorded in execution order,
// which is a topological order of the graph; backward replays the log once
// in reverse. One tape per thread of execution; tensors not attached to an
// active tape are plain values.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(const char* kind, std::function<void(GradStore&)> pull);
  size_t num_ops() const { return ops_.size(); }

  // Seeds d(loss)/d(loss) = 1, replays the log in reverse, then adds the
  // gradient of every requires_grad tensor seen on the tape into its .grad
  // buffer. Grads accumulate across calls until the caller zeroes them.
  void backward(const Tensor& loss);

  // Same traversal, but leaves the results in an external store instead of
  // touching tensor .grad fields. Used by training workers that reduce
  // per-group gradients in a fixed order.
  void backward_into(const Tensor& loss, GradStore& store);

  static Tape* active();

 private:
  struct Entry {
    TapeOp op;
    std::vector<std::shared_ptr<TensorData>> keep_alive;
  };
  friend class OpRecorder;
  std::vector<Entry> ops_;
  std::vector<std::shared_ptr<TensorData>> tracked_;
  Tape* prev_ = nullptr;
};

// Helper used by op implementations: holds the tensors an op must keep alive
// and records the pull closure on the active tape (if any).
class OpRecorder {
 public:
  static bool tracking(std::initializer_list<const Tensor*> inputs);
  static bool tracking(const std::vector<const Tensor*>& inputs);
  static void record(const char* kind, std::initializer_list<const Tensor*> pins,
                     std::function<void(GradStore&)> pull);
  static void record(const char* kind, const std::vector<const Tensor*>& pins,
                     std::function<void(GradStore&)> pull);
};

}  // namespace dispo
