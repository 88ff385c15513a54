#include "dispo/tape.hpp"

#include <stdexcept>
#include <unordered_set>

namespace dispo {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

std::vector<double>& GradStore::acc(const TensorData* node) {
  auto it = bufs_.find(node);
  if (it == bufs_.end()) {
    it = bufs_.emplace(node, std::vector<double>(node->data.size(), 0.0)).first;
  }
  return it->second;
}

const std::vector<double>* GradStore::find(const TensorData* node) const {
  auto it = bufs_.find(node);
  return it == bufs_.end() ? nullptr : &it->second;
}

Tape::Tape() {
  prev_ = g_active_tape;
  g_active_tape = this;
}

Tape::~Tape() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(const char* kind, std::function<void(GradStore&)> pull) {
  ops_.push_back(Entry{TapeOp{kind, std::move(pull)}, {}});
}

void Tape::backward_into(const Tensor& loss, GradStore& store) {
  if (loss.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + shape_str(loss.shape()));
  }
  store.acc(loss.node())[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    it->op.pull(store);
  }
}

void Tape::backward(const Tensor& loss) {
  GradStore store;
  backward_into(loss, store);
  // tracked_ holds one entry per pin, so a tensor reused by several ops (or
  // twice by one op) appears more than once; accumulate it only once.
  std::unordered_set<const TensorData*> seen;
  for (const auto& node : tracked_) {
    if (!node->requires_grad) continue;
    if (!seen.insert(node.get()).second) continue;
    const std::vector<double>* g = store.find(node.get());
    if (!g) continue;
    if (node->grad.empty()) node->grad.assign(node->data.size(), 0.0);
    for (size_t i = 0; i < g->size(); ++i) node->grad[i] += (*g)[i];
  }
}

bool OpRecorder::tracking(std::initializer_list<const Tensor*> inputs) {
  return tracking(std::vector<const Tensor*>(inputs));
}

bool OpRecorder::tracking(const std::vector<const Tensor*>& inputs) {
  if (!g_active_tape) return false;
  for (const Tensor* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

void OpRecorder::record(const char* kind, std::initializer_list<const Tensor*> pins,
                        std::function<void(GradStore&)> pull) {
  record(kind, std::vector<const Tensor*>(pins), std::move(pull));
}

void OpRecorder::record(const char* kind, const std::vector<const Tensor*>& pins,
                        std::function<void(GradStore&)> pull) {
  Tape* tape = g_active_tape;
  if (!tape) throw std::logic_error("OpRecorder::record without active tape");
  Tape::Entry entry{TapeOp{kind, std::move(pull)}, {}};
  entry.keep_alive.reserve(pins.size());
  for (const Tensor* t : pins) {
    entry.keep_alive.push_back(t->handle());
    tape->tracked_.push_back(t->handle());
  }
  tape->ops_.push_back(std::move(entry));
}

}  // namespace dispo
