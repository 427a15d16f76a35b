#include "flock/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flock::nn {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EMat>;
using CMap = Eigen::Map<const EMat>;

Map map(Array& a) { return Map(a.data.data(), a.rows, a.cols); }
CMap cmap(const Array& a) { return CMap(a.data.data(), a.rows, a.cols); }

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] void shape_error(const std::string& op, const Array& a, const Array& b) {
  throw std::invalid_argument(op + ": incompatible shapes " + a.shape_str() + " and " +
                              b.shape_str());
}

}  // namespace

int Tensor::rows() const { return tape->value_of(id).rows; }
int Tensor::cols() const { return tape->value_of(id).cols; }
const Array& Tensor::value() const { return tape->value_of(id); }

Array& Tape::grad_of(int id) {
  Node& n = nodes_[id];
  if (n.grad.data.empty()) n.grad = Array(n.val.rows, n.val.cols);
  return n.grad;
}

Tensor Tape::push(Array val, std::function<void(Tape&, Node&)> back) {
  Node n;
  n.val = std::move(val);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::leaf(Parameter& p) {
  Tensor t = push(p.value);
  nodes_[t.id].param = &p;
  return t;
}

Tensor Tape::constant(Array a) { return push(std::move(a)); }

Tensor Tape::matmul(Tensor a, Tensor b) {
  const Array& av = value_of(a.id);
  const Array& bv = value_of(b.id);
  if (av.cols != bv.rows) shape_error("matmul", av, bv);
  Array out(av.rows, bv.cols);
  map(out).noalias() = cmap(av) * cmap(bv);
  int a_id = a.id, b_id = b.id;
  return push(std::move(out), [a_id, b_id](Tape& t, Node& n) {
    const Array& av = t.value_of(a_id);
    const Array& bv = t.value_of(b_id);
    map(t.grad_of(a_id)).noalias() += cmap(n.grad) * cmap(bv).transpose();
    map(t.grad_of(b_id)).noalias() += cmap(av).transpose() * cmap(n.grad);
  });
}

Tensor Tape::add(Tensor a, Tensor b) {
  const Array& av = value_of(a.id);
  const Array& bv = value_of(b.id);
  int a_id = a.id, b_id = b.id;
  if (av.same_shape(bv)) {
    Array out = av;
    map(out) += cmap(bv);
    return push(std::move(out), [a_id, b_id](Tape& t, Node& n) {
      map(t.grad_of(a_id)) += cmap(n.grad);
      map(t.grad_of(b_id)) += cmap(n.grad);
    });
  }
  if (bv.rows == 1 && bv.cols == av.cols) {  // row broadcast
    Array out = av;
    map(out).rowwise() += cmap(bv).row(0);
    return push(std::move(out), [a_id, b_id](Tape& t, Node& n) {
      map(t.grad_of(a_id)) += cmap(n.grad);
      map(t.grad_of(b_id)).row(0) += cmap(n.grad).colwise().sum();
    });
  }
  shape_error("add", av, bv);
}

Tensor Tape::sub(Tensor a, Tensor b) {
  const Array& av = value_of(a.id);
  const Array& bv = value_of(b.id);
  if (!av.same_shape(bv)) shape_error("sub", av, bv);
  Array out = av;
  map(out) -= cmap(bv);
  int a_id = a.id, b_id = b.id;
  return push(std::move(out), [a_id, b_id](Tape& t, Node& n) {
    map(t.grad_of(a_id)) += cmap(n.grad);
    map(t.grad_of(b_id)) -= cmap(n.grad);
  });
}

Tensor Tape::mul(Tensor a, Tensor b) {
  const Array& av = value_of(a.id);
  const Array& bv = value_of(b.id);
  if (!av.same_shape(bv)) shape_error("mul", av, bv);
  Array out = av;
  map(out).array() *= cmap(bv).array();
  int a_id = a.id, b_id = b.id;
  return push(std::move(out), [a_id, b_id](Tape& t, Node& n) {
    map(t.grad_of(a_id)).array() += cmap(n.grad).array() * cmap(t.value_of(b_id)).array();
    map(t.grad_of(b_id)).array() += cmap(n.grad).array() * cmap(t.value_of(a_id)).array();
  });
}

Tensor Tape::scale(Tensor a, double s) {
  Array out = value_of(a.id);
  map(out) *= s;
  int a_id = a.id;
  return push(std::move(out),
              [a_id, s](Tape& t, Node& n) { map(t.grad_of(a_id)) += s * cmap(n.grad); });
}

Tensor Tape::one_minus(Tensor a) {
  Array out = value_of(a.id);
  map(out).array() = 1.0 - map(out).array();
  int a_id = a.id;
  return push(std::move(out),
              [a_id](Tape& t, Node& n) { map(t.grad_of(a_id)) -= cmap(n.grad); });
}

Tensor Tape::sigmoid(Tensor a) {
  Array out = value_of(a.id);
  for (double& x : out.data) x = stable_sigmoid(x);
  int a_id = a.id;
  return push(std::move(out), [a_id](Tape& t, Node& n) {
    auto y = cmap(n.val).array();
    map(t.grad_of(a_id)).array() += cmap(n.grad).array() * y * (1.0 - y);
  });
}

Tensor Tape::tanh(Tensor a) {
  Array out = value_of(a.id);
  for (double& x : out.data) x = std::tanh(x);
  int a_id = a.id;
  return push(std::move(out), [a_id](Tape& t, Node& n) {
    auto y = cmap(n.val).array();
    map(t.grad_of(a_id)).array() += cmap(n.grad).array() * (1.0 - y * y);
  });
}

Tensor Tape::swish(Tensor a) {
  const Array& av = value_of(a.id);
  Array out = av;
  for (double& x : out.data) x = x * stable_sigmoid(x);
  int a_id = a.id;
  return push(std::move(out), [a_id](Tape& t, Node& n) {
    const Array& x = t.value_of(a_id);
    Array& dx = t.grad_of(a_id);
    for (size_t i = 0; i < x.size(); ++i) {
      double s = stable_sigmoid(x.data[i]);
      dx.data[i] += n.grad.data[i] * (s + x.data[i] * s * (1.0 - s));
    }
  });
}

Tensor Tape::log(Tensor a) {
  Array out = value_of(a.id);
  for (double& x : out.data) x = std::log(x);
  int a_id = a.id;
  return push(std::move(out), [a_id](Tape& t, Node& n) {
    map(t.grad_of(a_id)).array() += cmap(n.grad).array() / cmap(t.value_of(a_id)).array();
  });
}

Tensor Tape::clamp(Tensor a, double lo, double hi) {
  Array out = value_of(a.id);
  for (double& x : out.data) x = std::min(std::max(x, lo), hi);
  int a_id = a.id;
  return push(std::move(out), [a_id, lo, hi](Tape& t, Node& n) {
    const Array& x = t.value_of(a_id);
    Array& dx = t.grad_of(a_id);
    for (size_t i = 0; i < x.size(); ++i)
      if (x.data[i] > lo && x.data[i] < hi) dx.data[i] += n.grad.data[i];
  });
}

Tensor Tape::softmax_rows(Tensor a) {
  Array out = value_of(a.id);
  for (int i = 0; i < out.rows; ++i) {
    double mx = out.at(i, 0);
    for (int j = 1; j < out.cols; ++j) mx = std::max(mx, out.at(i, j));
    double z = 0.0;
    for (int j = 0; j < out.cols; ++j) {
      out.at(i, j) = std::exp(out.at(i, j) - mx);
      z += out.at(i, j);
    }
    for (int j = 0; j < out.cols; ++j) out.at(i, j) /= z;
  }
  int a_id = a.id;
  return push(std::move(out), [a_id](Tape& t, Node& n) {
    Array& dx = t.grad_of(a_id);
    for (int i = 0; i < n.val.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < n.val.cols; ++j) dot += n.grad.at(i, j) * n.val.at(i, j);
      for (int j = 0; j < n.val.cols; ++j)
        dx.at(i, j) += n.val.at(i, j) * (n.grad.at(i, j) - dot);
    }
  });
}

Tensor Tape::concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty input");
  int rows = value_of(parts[0].id).rows;
  int cols = 0;
  for (const Tensor& p : parts) {
    if (value_of(p.id).rows != rows)
      shape_error("concat_cols", value_of(parts[0].id), value_of(p.id));
    cols += value_of(p.id).cols;
  }
  Array out(rows, cols);
  std::vector<std::pair<int, int>> pieces;  // (child id, col offset)
  int offset = 0;
  for (const Tensor& p : parts) {
    const Array& pv = value_of(p.id);
    for (int i = 0; i < rows; ++i)
      std::copy_n(&pv.data[static_cast<size_t>(i) * pv.cols], pv.cols,
                  &out.data[static_cast<size_t>(i) * cols + offset]);
    pieces.push_back({p.id, offset});
    offset += pv.cols;
  }
  return push(std::move(out), [pieces](Tape& t, Node& n) {
    for (auto [id, off] : pieces) {
      Array& dx = t.grad_of(id);
      for (int i = 0; i < dx.rows; ++i)
        for (int j = 0; j < dx.cols; ++j) dx.at(i, j) += n.grad.at(i, off + j);
    }
  });
}

Tensor Tape::concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty input");
  int cols = value_of(parts[0].id).cols;
  int rows = 0;
  for (const Tensor& p : parts) {
    if (value_of(p.id).cols != cols)
      shape_error("concat_rows", value_of(parts[0].id), value_of(p.id));
    rows += value_of(p.id).rows;
  }
  Array out(rows, cols);
  std::vector<std::pair<int, int>> pieces;  // (child id, row offset)
  int offset = 0;
  for (const Tensor& p : parts) {
    const Array& pv = value_of(p.id);
    std::copy_n(pv.data.data(), pv.size(), &out.data[static_cast<size_t>(offset) * cols]);
    pieces.push_back({p.id, offset});
    offset += pv.rows;
  }
  return push(std::move(out), [pieces, cols](Tape& t, Node& n) {
    for (auto [id, off] : pieces) {
      Array& dx = t.grad_of(id);
      for (size_t i = 0; i < dx.size(); ++i)
        dx.data[i] += n.grad.data[static_cast<size_t>(off) * cols + i];
    }
  });
}

Tensor Tape::slice_rows(Tensor a, int row0, int row1) {
  const Array& av = value_of(a.id);
  if (row0 < 0 || row1 > av.rows || row0 >= row1)
    throw std::invalid_argument("slice_rows: bad range [" + std::to_string(row0) + ", " +
                                std::to_string(row1) + ") for " + av.shape_str());
  Array out(row1 - row0, av.cols);
  std::copy_n(&av.data[static_cast<size_t>(row0) * av.cols], out.size(), out.data.data());
  int a_id = a.id;
  return push(std::move(out), [a_id, row0](Tape& t, Node& n) {
    Array& dx = t.grad_of(a_id);
    for (size_t i = 0; i < n.grad.size(); ++i)
      dx.data[static_cast<size_t>(row0) * dx.cols + i] += n.grad.data[i];
  });
}

Tensor Tape::slice_cols(Tensor a, int col0, int col1) {
  const Array& av = value_of(a.id);
  if (col0 < 0 || col1 > av.cols || col0 >= col1)
    throw std::invalid_argument("slice_cols: bad range [" + std::to_string(col0) + ", " +
                                std::to_string(col1) + ") for " + av.shape_str());
  Array out(av.rows, col1 - col0);
  for (int i = 0; i < av.rows; ++i)
    std::copy_n(&av.data[static_cast<size_t>(i) * av.cols + col0], out.cols,
                &out.data[static_cast<size_t>(i) * out.cols]);
  int a_id = a.id;
  return push(std::move(out), [a_id, col0](Tape& t, Node& n) {
    Array& dx = t.grad_of(a_id);
    for (int i = 0; i < n.grad.rows; ++i)
      for (int j = 0; j < n.grad.cols; ++j) dx.at(i, col0 + j) += n.grad.at(i, j);
  });
}

Tensor Tape::transpose(Tensor a) {
  const Array& av = value_of(a.id);
  Array out(av.cols, av.rows);
  map(out) = cmap(av).transpose();
  int a_id = a.id;
  return push(std::move(out), [a_id](Tape& t, Node& n) {
    map(t.grad_of(a_id)) += cmap(n.grad).transpose();
  });
}

Tensor Tape::sum(Tensor a) {
  const Array& av = value_of(a.id);
  double s = 0.0;
  for (double x : av.data) s += x;
  Array out(1, 1, s);
  int a_id = a.id;
  return push(std::move(out), [a_id](Tape& t, Node& n) {
    double g = n.grad.data[0];
    for (double& x : t.grad_of(a_id).data) x += g;
  });
}

Tensor Tape::mean(Tensor a) {
  const Array& av = value_of(a.id);
  double s = 0.0;
  for (double x : av.data) s += x;
  double inv = 1.0 / static_cast<double>(av.size());
  Array out(1, 1, s * inv);
  int a_id = a.id;
  return push(std::move(out), [a_id, inv](Tape& t, Node& n) {
    double g = n.grad.data[0] * inv;
    for (double& x : t.grad_of(a_id).data) x += g;
  });
}

Tensor Tape::rmsnorm(Tensor x, Tensor gain, double eps) {
  const Array& xv = value_of(x.id);
  const Array& gv = value_of(gain.id);
  if (gv.rows != 1 || gv.cols != xv.cols) shape_error("rmsnorm", xv, gv);
  Array out(xv.rows, xv.cols);
  for (int i = 0; i < xv.rows; ++i) {
    double m = 0.0;
    for (int j = 0; j < xv.cols; ++j) m += xv.at(i, j) * xv.at(i, j);
    m /= xv.cols;
    double inv_rms = 1.0 / std::sqrt(m + eps);
    for (int j = 0; j < xv.cols; ++j) out.at(i, j) = xv.at(i, j) * inv_rms * gv.at(0, j);
  }
  int x_id = x.id, g_id = gain.id;
  return push(std::move(out), [x_id, g_id, eps](Tape& t, Node& n) {
    const Array& xv = t.value_of(x_id);
    const Array& gv = t.value_of(g_id);
    Array& dx = t.grad_of(x_id);
    Array& dg = t.grad_of(g_id);
    int c = xv.cols;
    for (int i = 0; i < xv.rows; ++i) {
      double m = 0.0;
      for (int j = 0; j < c; ++j) m += xv.at(i, j) * xv.at(i, j);
      m /= c;
      double s = std::sqrt(m + eps);
      double inv_s = 1.0 / s;
      double proj = 0.0;  // sum_k dY_ik g_k x_ik
      for (int j = 0; j < c; ++j) proj += n.grad.at(i, j) * gv.at(0, j) * xv.at(i, j);
      double scale = proj / (c * s * s * s);
      for (int j = 0; j < c; ++j) {
        dx.at(i, j) += n.grad.at(i, j) * gv.at(0, j) * inv_s - xv.at(i, j) * scale;
        dg.at(0, j) += n.grad.at(i, j) * xv.at(i, j) * inv_s;
      }
    }
  });
}

Tensor Tape::gather_rows(Tensor a, std::vector<int> idx) {
  const Array& av = value_of(a.id);
  Array out(static_cast<int>(idx.size()), av.cols);
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= av.rows)
      throw std::out_of_range("gather_rows: index " + std::to_string(idx[i]) + " out of " +
                              av.shape_str());
    std::copy_n(&av.data[static_cast<size_t>(idx[i]) * av.cols], av.cols,
                &out.data[i * static_cast<size_t>(av.cols)]);
  }
  int a_id = a.id;
  return push(std::move(out), [a_id, idx = std::move(idx)](Tape& t, Node& n) {
    Array& dx = t.grad_of(a_id);
    int c = dx.cols;
    for (size_t i = 0; i < idx.size(); ++i)
      for (int j = 0; j < c; ++j)
        dx.at(idx[i], j) += n.grad.data[i * static_cast<size_t>(c) + j];
  });
}

Tensor Tape::scatter_add_rows(Tensor a, std::vector<int> idx, int out_rows) {
  const Array& av = value_of(a.id);
  if (static_cast<int>(idx.size()) != av.rows)
    throw std::invalid_argument("scatter_add_rows: index count " + std::to_string(idx.size()) +
                                " != rows of " + av.shape_str());
  Array out(out_rows, av.cols);
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= out_rows)
      throw std::out_of_range("scatter_add_rows: index " + std::to_string(idx[i]));
    for (int j = 0; j < av.cols; ++j) out.at(idx[i], j) += av.at(static_cast<int>(i), j);
  }
  int a_id = a.id;
  return push(std::move(out), [a_id, idx = std::move(idx)](Tape& t, Node& n) {
    Array& dx = t.grad_of(a_id);
    for (size_t i = 0; i < idx.size(); ++i)
      for (int j = 0; j < dx.cols; ++j) dx.at(static_cast<int>(i), j) += n.grad.at(idx[i], j);
  });
}

Tensor Tape::repeat_row(Tensor row, int n) {
  const Array& rv = value_of(row.id);
  if (rv.rows != 1) throw std::invalid_argument("repeat_row: input must be [1,c]");
  Array out(n, rv.cols);
  for (int i = 0; i < n; ++i)
    std::copy_n(rv.data.data(), rv.cols, &out.data[static_cast<size_t>(i) * rv.cols]);
  int r_id = row.id;
  return push(std::move(out), [r_id](Tape& t, Node& nd) {
    map(t.grad_of(r_id)).row(0) += cmap(nd.grad).colwise().sum();
  });
}

Tensor Tape::segment_softmax_pool(Tensor props, Tensor conf,
                                  std::vector<std::vector<int>> segments, int heads) {
  const Array& pv = value_of(props.id);
  const Array& cv = value_of(conf.id);
  if (cv.rows != pv.rows || cv.cols != heads || pv.cols % heads != 0)
    shape_error("segment_softmax_pool", pv, cv);
  int head_dim = pv.cols / heads;
  int n_segments = static_cast<int>(segments.size());
  Array out(n_segments, pv.cols);
  for (int s = 0; s < n_segments; ++s) {
    const auto& members = segments[s];
    if (members.empty()) continue;
    for (int k = 0; k < heads; ++k) {
      double mx = cv.at(members[0], k);
      for (int m : members) mx = std::max(mx, cv.at(m, k));
      double z = 0.0;
      for (int m : members) z += std::exp(cv.at(m, k) - mx);
      for (int m : members) {
        double w = std::exp(cv.at(m, k) - mx) / z;
        for (int j = 0; j < head_dim; ++j)
          out.at(s, k * head_dim + j) += w * pv.at(m, k * head_dim + j);
      }
    }
  }
  int p_id = props.id, c_id = conf.id;
  return push(std::move(out), [p_id, c_id, segments = std::move(segments), heads,
                               head_dim](Tape& t, Node& n) {
    const Array& pv = t.value_of(p_id);
    const Array& cv = t.value_of(c_id);
    Array& dp = t.grad_of(p_id);
    Array& dc = t.grad_of(c_id);
    for (size_t s = 0; s < segments.size(); ++s) {
      const auto& members = segments[s];
      if (members.empty()) continue;
      for (int k = 0; k < heads; ++k) {
        double mx = cv.at(members[0], k);
        for (int m : members) mx = std::max(mx, cv.at(m, k));
        double z = 0.0;
        for (int m : members) z += std::exp(cv.at(m, k) - mx);
        // dot_m = dOut . props_m per member, mean_dot = sum_m w_m dot_m
        double mean_dot = 0.0;
        for (int m : members) {
          double w = std::exp(cv.at(m, k) - mx) / z;
          double dot = 0.0;
          for (int j = 0; j < head_dim; ++j)
            dot += n.grad.at(static_cast<int>(s), k * head_dim + j) *
                   pv.at(m, k * head_dim + j);
          mean_dot += w * dot;
        }
        for (int m : members) {
          double w = std::exp(cv.at(m, k) - mx) / z;
          double dot = 0.0;
          for (int j = 0; j < head_dim; ++j) {
            double g = n.grad.at(static_cast<int>(s), k * head_dim + j);
            dp.at(m, k * head_dim + j) += w * g;
            dot += g * pv.at(m, k * head_dim + j);
          }
          dc.at(m, k) += w * (dot - mean_dot);
        }
      }
    }
  });
}

Tensor Tape::dot_const(Tensor a, std::vector<double> w) {
  const Array& av = value_of(a.id);
  if (w.size() != av.size())
    throw std::invalid_argument("dot_const: weight count " + std::to_string(w.size()) +
                                " != elements of " + av.shape_str());
  double s = 0.0;
  for (size_t i = 0; i < w.size(); ++i) s += w[i] * av.data[i];
  int a_id = a.id;
  return push(Array(1, 1, s), [a_id, w = std::move(w)](Tape& t, Node& n) {
    Array& dx = t.grad_of(a_id);
    double g = n.grad.data[0];
    for (size_t i = 0; i < w.size(); ++i) dx.data[i] += g * w[i];
  });
}

void Tape::backward(Tensor root) {
  if (root.tape != this) throw std::invalid_argument("backward: tensor from another tape");
  const Array& rv = value_of(root.id);
  if (rv.rows != 1 || rv.cols != 1)
    throw std::invalid_argument("backward: root must be a scalar, got " + rv.shape_str());
  grad_of(root.id).data[0] = 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.data.empty()) continue;
    if (n.back) n.back(*this, n);
    if (n.param != nullptr && n.param->trainable) {
      Array& pg = n.param->grad;
      for (size_t k = 0; k < pg.size(); ++k) pg.data[k] += n.grad.data[k];
    }
    // nodes above i are finished with this node's buffers; release them to
    // keep the working set near the forward peak (the root's value stays
    // readable for callers)
    n.grad = Array();
    if (i != root.id) n.val = Array();
  }
}

double gradient_check(const std::function<Tensor(Tape&, Tensor)>& f, const Array& x,
                      double step) {
  Parameter px("gradcheck_input", x);
  Array g_ad;
  {
    Tape tape;
    Tensor tx = tape.leaf(px);
    Tensor y = f(tape, tx);
    tape.backward(y);
    g_ad = px.grad;
  }
  auto eval_at = [&](const Array& point) {
    Tape tape;
    Tensor tx = tape.constant(point);
    return f(tape, tx).value().data[0];
  };
  double max_err = 0.0;
  Array probe = x;
  for (size_t i = 0; i < x.size(); ++i) {
    probe.data[i] = x.data[i] + step;
    double up = eval_at(probe);
    probe.data[i] = x.data[i] - step;
    double down = eval_at(probe);
    probe.data[i] = x.data[i];
    double fd = (up - down) / (2.0 * step);
    double ad = g_ad.data[i];
    double err = std::fabs(fd - ad) / std::max({1.0, std::fabs(fd), std::fabs(ad)});
    max_err = std::max(max_err, err);
  }
  return max_err;
}

double gradient_check_params(const std::function<double(bool)>& eval_loss_and_maybe_grad,
                             std::vector<Parameter*> params, double step) {
  for (Parameter* p : params) p->zero_grad();
  eval_loss_and_maybe_grad(true);
  std::vector<Array> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  double max_err = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    for (size_t i = 0; i < p->value.size(); ++i) {
      double original = p->value.data[i];
      p->value.data[i] = original + step;
      double up = eval_loss_and_maybe_grad(false);
      p->value.data[i] = original - step;
      double down = eval_loss_and_maybe_grad(false);
      p->value.data[i] = original;
      double fd = (up - down) / (2.0 * step);
      double ad = analytic[pi].data[i];
      double err = std::fabs(fd - ad) / std::max({1.0, std::fabs(fd), std::fabs(ad)});
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace flock::nn
