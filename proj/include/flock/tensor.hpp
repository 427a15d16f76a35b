#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flock/rng.hpp"

namespace flock::nn {

// 64-byte-aligned storage. Vectorized kernels pick their peeling by the
// buffer address, so a fixed alignment keeps summation order, and thus
// results, bit-identical across runs.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, size_t) noexcept { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};
using DoubleVec = std::vector<double, AlignedAllocator<double>>;

// Dense row-major matrix of 64-bit floats. Vectors are [1,n] or [n,1];
// scalars are [1,1]. All model arithmetic is double precision so gradient
// checks and invariance tolerances stay tight.
struct Array {
  int rows = 0;
  int cols = 0;
  DoubleVec data;

  Array() = default;
  Array(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
  size_t size() const { return data.size(); }
  bool same_shape(const Array& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const {
    return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
  }

  static Array randn(int r, int c, double stddev, Rng& rng) {
    Array a(r, c);
    for (double& x : a.data) x = rng.normal(0.0, stddev);
    return a;
  }
};

// Named learnable array with its gradient accumulator.
struct Parameter {
  std::string name;
  Array value;
  Array grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Array v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

class Tape;

// Handle to a node on a tape.
struct Tensor {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  int rows() const;
  int cols() const;
  const Array& value() const;
};

// Reverse-mode tape. Nodes are appended in topological order, so backward
// is a single reverse sweep. One tape per forward/backward pass; passes on
// separate tapes are independent and may run on different threads.
class Tape {
 public:
  // Leaf tracking gradients into p.grad.
  Tensor leaf(Parameter& p);
  // Leaf with no gradient.
  Tensor constant(Array a);
  Tensor zeros(int rows, int cols) { return constant(Array(rows, cols)); }

  Tensor matmul(Tensor a, Tensor b);
  // Elementwise; b may also be a [1,c] row broadcast against [r,c] a.
  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);
  Tensor scale(Tensor a, double s);
  Tensor one_minus(Tensor a);

  Tensor sigmoid(Tensor a);
  Tensor tanh(Tensor a);
  Tensor swish(Tensor a);  // x * sigmoid(x)
  Tensor log(Tensor a);
  Tensor clamp(Tensor a, double lo, double hi);
  Tensor softmax_rows(Tensor a);

  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor concat_rows(const std::vector<Tensor>& parts);
  Tensor slice_rows(Tensor a, int row0, int row1);
  Tensor slice_cols(Tensor a, int col0, int col1);
  Tensor transpose(Tensor a);
  Tensor sum(Tensor a);   // [1,1]
  Tensor mean(Tensor a);  // [1,1]

  // y = x / sqrt(mean(x^2) + eps) * gain, per row; gain is [1,c].
  Tensor rmsnorm(Tensor x, Tensor gain, double eps);

  // out[i,:] = a[idx[i],:]; gradient scatter-adds back.
  Tensor gather_rows(Tensor a, std::vector<int> idx);
  // out has out_rows rows; row idx[i] accumulates a[i,:].
  Tensor scatter_add_rows(Tensor a, std::vector<int> idx, int out_rows);
  // [1,c] row repeated n times.
  Tensor repeat_row(Tensor row, int n);

  // Confidence-weighted multi-head pooling. props is [M, d], conf is
  // [M, heads] with d divisible by heads. For output row s and head k,
  // out = sum over rows m in segments[s] of softmax(conf[:,k]) * props
  // slice of head k. Members are consumed in the order given, which the
  // caller fixes canonically (walk index, then position). Empty segments
  // yield zero rows.
  Tensor segment_softmax_pool(Tensor props, Tensor conf, std::vector<std::vector<int>> segments,
                              int heads);

  // sum_i w[i] * a.data[i] as a scalar node; w is captured as a constant.
  Tensor dot_const(Tensor a, std::vector<double> w);

  void backward(Tensor root);

  size_t num_nodes() const { return nodes_.size(); }
  const Array& value_of(int id) const { return nodes_[id].val; }
  Array& grad_of(int id);  // lazily allocated
  bool has_grad(int id) const { return !nodes_[id].grad.data.empty(); }

 private:
  friend struct Tensor;
  struct Node {
    Array val;
    Array grad;  // empty until touched by backward
    Parameter* param = nullptr;
    std::function<void(Tape&, Node&)> back;  // empty for leaves
  };

  Tensor push(Array val, std::function<void(Tape&, Node&)> back = {});
  const Node& node(int id) const { return nodes_[id]; }

  std::vector<Node> nodes_;
};

// Max over coordinates of |g_fd - g_ad| / max(1, |g_fd|, |g_ad|) where
// g_fd is a central finite difference of f at x and g_ad comes from one
// taped backward pass. f must build a scalar from a fresh tape each call.
double gradient_check(const std::function<Tensor(Tape&, Tensor)>& f, const Array& x,
                      double step = 1e-4);

// Same contract, perturbing a set of named parameters instead of an input.
double gradient_check_params(const std::function<double(bool)>& eval_loss_and_maybe_grad,
                             std::vector<Parameter*> params, double step = 1e-4);

}  // namespace flock::nn
