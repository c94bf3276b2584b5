#include "hcmgnn/numerics/ops.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hcmgnn::num {
namespace {

Tape& tape_of(Var a, const char* op) {
  if (a.tape == nullptr) throw std::invalid_argument(std::string(op) + ": unbound variable");
  a.tape->check_owner(a, op);
  return *a.tape;
}

Tape& tape_of(Var a, Var b, const char* op) {
  Tape& t = tape_of(a, op);
  t.check_owner(b, op);
  return t;
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() +
                              " vs " + b.shape_string());
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_error(op, a, b);
}

void check_segments(const char* op, const Tensor& a, std::span<const std::uint32_t> segment,
                    std::size_t segments) {
  if (segment.size() != a.rows()) {
    throw std::invalid_argument(std::string(op) + ": " + std::to_string(segment.size()) +
                                " segment ids for " + a.shape_string());
  }
  for (std::uint32_t s : segment) {
    if (s >= segments) {
      throw std::invalid_argument(std::string(op) + ": segment id " + std::to_string(s) +
                                  " out of range " + std::to_string(segments));
    }
  }
}

// C (m x n) += A (m x k) * B (k x n), all row-major. Four rows of C are
// updated per pass over a row of B.
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    double* c0 = c + i * n;
    double* c1 = c0 + n;
    double* c2 = c1 + n;
    double* c3 = c2 + n;
    const double* a0 = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double v0 = a0[p], v1 = a0[k + p], v2 = a0[2 * k + p], v3 = a0[3 * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double bv = brow[j];
        c0[j] += v0 * bv;
        c1[j] += v1 * bv;
        c2[j] += v2 * bv;
        c3[j] += v3 * bv;
      }
    }
  }
  for (; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

std::vector<double> transposed(const double* x, std::size_t rows, std::size_t cols) {
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t q = 0; q < cols; ++q) out[q * rows + r] = x[r * cols + q];
  }
  return out;
}

template <typename F, typename D>
Var unary(Var a, const char* op, F f, D df) {
  Tape& t = tape_of(a, op);
  const Tensor& x = a.value();
  Tensor out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  const std::size_t ia = a.id;
  return t.record(std::move(out), {ia}, [ia, df](Tape& tp, std::span<const double> up) {
    std::span<double> g = tp.grad_buffer(ia);
    const Tensor& xv = tp.value(Var{&tp, ia});
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += up[i] * df(xv[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b, "matmul");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.cols() != y.rows()) shape_error("matmul", x, y);
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  Tensor out(m, n);
  gemm_acc(x.data().data(), y.data().data(), out.data().data(), m, k, n);
  const std::size_t ia = a.id, ib = b.id;
  return t.record(std::move(out), {ia, ib}, [ia, ib, m, k, n](Tape& tp, std::span<const double> up) {
    const Tensor& xv = tp.value(Var{&tp, ia});
    const Tensor& yv = tp.value(Var{&tp, ib});
    std::span<double> ga = tp.grad_buffer(ia);
    if (!ga.empty()) {
      // dA = dC * B^T
      const auto yt = transposed(yv.data().data(), k, n);
      gemm_acc(up.data(), yt.data(), ga.data(), m, n, k);
    }
    std::span<double> gb = tp.grad_buffer(ib);
    if (!gb.empty()) {
      // dB = A^T * dC
      const auto xt = transposed(xv.data().data(), m, k);
      gemm_acc(xt.data(), up.data(), gb.data(), k, m, n);
    }
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a, "transpose");
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out(c, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(j, i) = x(i, j);
  const std::size_t ia = a.id;
  return t.record(std::move(out), {ia}, [ia, r, c](Tape& tp, std::span<const double> up) {
    std::span<double> g = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += up[j * r + i];
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b, "add");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same_shape("add", x, y);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  const std::size_t ia = a.id, ib = b.id;
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::span<const double> up) {
    for (std::size_t id : {ia, ib}) {
      std::span<double> g = tp.grad_buffer(id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += up[i];
    }
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b, "sub");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same_shape("sub", x, y);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  const std::size_t ia = a.id, ib = b.id;
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::span<const double> up) {
    std::span<double> ga = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += up[i];
    std::span<double> gb = tp.grad_buffer(ib);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= up[i];
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = tape_of(a, b, "hadamard");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same_shape("hadamard", x, y);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  const std::size_t ia = a.id, ib = b.id;
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::span<const double> up) {
    const Tensor& xv = tp.value(Var{&tp, ia});
    const Tensor& yv = tp.value(Var{&tp, ib});
    std::span<double> ga = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += up[i] * yv[i];
    std::span<double> gb = tp.grad_buffer(ib);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += up[i] * xv[i];
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a, "scale");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  const std::size_t ia = a.id;
  return t.record(std::move(out), {ia}, [ia, s](Tape& tp, std::span<const double> up) {
    std::span<double> g = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += up[i] * s;
  });
}

Var scale(Var a, Var s) {
  Tape& t = tape_of(a, s, "scale");
  const Tensor& sv = s.value();
  if (sv.rows() != 1 || sv.cols() != 1) shape_error("scale", a.value(), sv);
  const double k = sv[0];
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= k;
  const std::size_t ia = a.id, is = s.id;
  return t.record(std::move(out), {ia, is}, [ia, is](Tape& tp, std::span<const double> up) {
    const Tensor& xv = tp.value(Var{&tp, ia});
    const double kv = tp.value(Var{&tp, is})[0];
    std::span<double> ga = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += up[i] * kv;
    std::span<double> gs = tp.grad_buffer(is);
    if (!gs.empty()) {
      double acc = 0.0;
      for (std::size_t i = 0; i < xv.size(); ++i) acc += up[i] * xv[i];
      gs[0] += acc;
    }
  });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row, "add_row");
  const Tensor& x = a.value();
  const Tensor& r = row.value();
  if (r.rows() != 1 || r.cols() != x.cols()) shape_error("add_row", x, r);
  Tensor out = x;
  const std::size_t n = x.rows(), c = x.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) += r[j];
  const std::size_t ia = a.id, ir = row.id;
  return t.record(std::move(out), {ia, ir}, [ia, ir, n, c](Tape& tp, std::span<const double> up) {
    std::span<double> ga = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += up[i];
    std::span<double> gr = tp.grad_buffer(ir);
    if (!gr.empty()) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) gr[j] += up[i * c + j];
    }
  });
}

Var mul_row(Var a, Var row) {
  Tape& t = tape_of(a, row, "mul_row");
  const Tensor& x = a.value();
  const Tensor& r = row.value();
  if (r.rows() != 1 || r.cols() != x.cols()) shape_error("mul_row", x, r);
  Tensor out = x;
  const std::size_t n = x.rows(), c = x.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) *= r[j];
  const std::size_t ia = a.id, ir = row.id;
  return t.record(std::move(out), {ia, ir}, [ia, ir, n, c](Tape& tp, std::span<const double> up) {
    const Tensor& xv = tp.value(Var{&tp, ia});
    const Tensor& rv = tp.value(Var{&tp, ir});
    std::span<double> ga = tp.grad_buffer(ia);
    if (!ga.empty()) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += up[i * c + j] * rv[j];
    }
    std::span<double> gr = tp.grad_buffer(ir);
    if (!gr.empty()) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) gr[j] += up[i * c + j] * xv(i, j);
    }
  });
}

Var scale_rows(Var a, Var column) {
  Tape& t = tape_of(a, column, "scale_rows");
  const Tensor& x = a.value();
  const Tensor& w = column.value();
  if (w.cols() != 1 || w.rows() != x.rows()) shape_error("scale_rows", x, w);
  Tensor out = x;
  const std::size_t n = x.rows(), c = x.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) *= w[i];
  const std::size_t ia = a.id, iw = column.id;
  return t.record(std::move(out), {ia, iw}, [ia, iw, n, c](Tape& tp, std::span<const double> up) {
    const Tensor& xv = tp.value(Var{&tp, ia});
    const Tensor& wv = tp.value(Var{&tp, iw});
    std::span<double> ga = tp.grad_buffer(ia);
    if (!ga.empty()) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += up[i * c + j] * wv[i];
    }
    std::span<double> gw = tp.grad_buffer(iw);
    if (!gw.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < c; ++j) acc += up[i * c + j] * xv(i, j);
        gw[i] += acc;
      }
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Tape& t = tape_of(parts[0], "concat_cols");
  const std::size_t n = parts[0].rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> widths;
  for (Var p : parts) {
    t.check_owner(p, "concat_cols");
    if (p.rows() != n) shape_error("concat_cols", parts[0].value(), p.value());
    ids.push_back(p.id);
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out(n, total);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& x = p.value();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, offset + j) = x(i, j);
    offset += x.cols();
  }
  std::vector<std::size_t> inputs = ids;
  return t.record(std::move(out), std::move(inputs),
                  [ids, widths, n, total](Tape& tp, std::span<const double> up) {
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      std::span<double> g = tp.grad_buffer(ids[k]);
                      const std::size_t w = widths[k];
                      if (!g.empty()) {
                        for (std::size_t i = 0; i < n; ++i)
                          for (std::size_t j = 0; j < w; ++j)
                            g[i * w + j] += up[i * total + off + j];
                      }
                      off += w;
                    }
                  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(a, "slice_cols");
  const Tensor& x = a.value();
  if (begin >= end || end > x.cols()) {
    throw std::invalid_argument("slice_cols: range [" + std::to_string(begin) + "," +
                                std::to_string(end) + ") invalid for " + x.shape_string());
  }
  const std::size_t n = x.rows(), c = x.cols(), w = end - begin;
  Tensor out(n, w);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) out(i, j) = x(i, begin + j);
  const std::size_t ia = a.id;
  return t.record(std::move(out), {ia}, [ia, n, c, w, begin](Tape& tp, std::span<const double> up) {
    std::span<double> g = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) g[i * c + begin + j] += up[i * w + j];
  });
}

Var gather_rows(Var a, std::span<const std::uint32_t> index) {
  Tape& t = tape_of(a, "gather_rows");
  const Tensor& x = a.value();
  const std::size_t c = x.cols();
  Tensor out(index.size(), c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= x.rows()) {
      throw std::invalid_argument("gather_rows: row " + std::to_string(index[i]) +
                                  " out of range for " + x.shape_string());
    }
    std::span<const double> src = x.row(index[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  const std::size_t ia = a.id;
  std::vector<std::uint32_t> idx(index.begin(), index.end());
  return t.record(std::move(out), {ia}, [ia, c, idx = std::move(idx)](Tape& tp, std::span<const double> up) {
    std::span<double> g = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double* dst = g.data() + static_cast<std::size_t>(idx[i]) * c;
      const double* src = up.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
    }
  });
}

Var segment_sum(Var a, std::span<const std::uint32_t> segment, std::size_t segments) {
  Tape& t = tape_of(a, "segment_sum");
  const Tensor& x = a.value();
  check_segments("segment_sum", x, segment, segments);
  const std::size_t c = x.cols();
  Tensor out(segments, c);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::span<const double> src = x.row(i);
    std::span<double> dst = out.row(segment[i]);
    for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
  }
  const std::size_t ia = a.id;
  std::vector<std::uint32_t> seg(segment.begin(), segment.end());
  return t.record(std::move(out), {ia}, [ia, c, seg = std::move(seg)](Tape& tp, std::span<const double> up) {
    std::span<double> g = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const double* src = up.data() + static_cast<std::size_t>(seg[i]) * c;
      double* dst = g.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
    }
  });
}

Var weighted_segment_sum(Var weights, Var values, std::span<const std::uint32_t> index,
                         std::span<const std::uint32_t> segment, std::size_t segments) {
  Tape& t = tape_of(weights, values, "weighted_segment_sum");
  const Tensor& w = weights.value();
  const Tensor& v = values.value();
  if (w.rows() != index.size() || index.size() != segment.size()) {
    throw std::invalid_argument("weighted_segment_sum: weights " + w.shape_string() + " for " +
                                std::to_string(index.size()) + " indices and " +
                                std::to_string(segment.size()) + " segment ids");
  }
  const std::size_t heads = w.cols(), f = v.cols();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= v.rows() || segment[i] >= segments) {
      throw std::invalid_argument("weighted_segment_sum: entry " + std::to_string(i) +
                                  " out of range for values " + v.shape_string());
    }
  }
  Tensor out(segments, heads * f);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const double* src = v.data().data() + static_cast<std::size_t>(index[i]) * f;
    double* dst = out.data().data() + static_cast<std::size_t>(segment[i]) * heads * f;
    for (std::size_t k = 0; k < heads; ++k) {
      const double a = w(i, k);
      for (std::size_t j = 0; j < f; ++j) dst[k * f + j] += a * src[j];
    }
  }
  const std::size_t iw = weights.id, iv = values.id;
  std::vector<std::uint32_t> idx(index.begin(), index.end());
  std::vector<std::uint32_t> seg(segment.begin(), segment.end());
  return t.record(std::move(out), {iw, iv},
                  [iw, iv, heads, f, idx = std::move(idx), seg = std::move(seg)](
                      Tape& tp, std::span<const double> up) {
                    const Tensor& wv = tp.value(Var{&tp, iw});
                    const Tensor& vv = tp.value(Var{&tp, iv});
                    std::span<double> gw = tp.grad_buffer(iw);
                    std::span<double> gv = tp.grad_buffer(iv);
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      const double* u = up.data() + static_cast<std::size_t>(seg[i]) * heads * f;
                      const double* src = vv.data().data() + static_cast<std::size_t>(idx[i]) * f;
                      for (std::size_t k = 0; k < heads; ++k) {
                        if (!gw.empty()) {
                          double acc = 0.0;
                          for (std::size_t j = 0; j < f; ++j) acc += u[k * f + j] * src[j];
                          gw[i * heads + k] += acc;
                        }
                        if (!gv.empty()) {
                          const double a = wv(i, k);
                          double* dst = gv.data() + static_cast<std::size_t>(idx[i]) * f;
                          for (std::size_t j = 0; j < f; ++j) dst[j] += a * u[k * f + j];
                        }
                      }
                    }
                  });
}

Var segment_mean(Var a, std::span<const std::uint32_t> segment, std::size_t segments) {
  Tape& t = tape_of(a, "segment_mean");
  const Tensor& x = a.value();
  check_segments("segment_mean", x, segment, segments);
  std::vector<double> count(segments, 0.0);
  for (std::uint32_t s : segment) count[s] += 1.0;
  const std::size_t c = x.cols();
  Tensor out(segments, c);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::span<const double> src = x.row(i);
    std::span<double> dst = out.row(segment[i]);
    for (std::size_t j = 0; j < c; ++j) dst[j] += src[j] / count[segment[i]];
  }
  const std::size_t ia = a.id;
  std::vector<std::uint32_t> seg(segment.begin(), segment.end());
  return t.record(std::move(out), {ia},
                  [ia, c, seg = std::move(seg), count = std::move(count)](Tape& tp, std::span<const double> up) {
                    std::span<double> g = tp.grad_buffer(ia);
                    for (std::size_t i = 0; i < seg.size(); ++i) {
                      const double* src = up.data() + static_cast<std::size_t>(seg[i]) * c;
                      double* dst = g.data() + i * c;
                      for (std::size_t j = 0; j < c; ++j) dst[j] += src[j] / count[seg[i]];
                    }
                  });
}

Var segment_softmax(Var a, std::span<const std::uint32_t> segment, std::size_t segments) {
  Tape& t = tape_of(a, "segment_softmax");
  const Tensor& x = a.value();
  if (x.rows() == 0 || x.cols() == 0) {
    throw std::invalid_argument("segment_softmax: empty input " + x.shape_string());
  }
  check_segments("segment_softmax", x, segment, segments);
  const std::size_t n = x.rows(), c = x.cols();
  Tensor maxv(segments, c, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) maxv(segment[i], j) = std::max(maxv(segment[i], j), x(i, j));
  Tensor out(n, c);
  Tensor denom(segments, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      out(i, j) = std::exp(x(i, j) - maxv(segment[i], j));
      denom(segment[i], j) += out(i, j);
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) /= denom(segment[i], j);

  const std::size_t ia = a.id;
  // The output's slot on the tape; the rule reads the softmax values back.
  const std::size_t io = t.size();
  std::vector<std::uint32_t> seg(segment.begin(), segment.end());
  return t.record(std::move(out), {ia},
                  [ia, io, n, c, segments, seg = std::move(seg)](Tape& tp, std::span<const double> up) {
                    const Tensor& y = tp.value(Var{&tp, io});
                    Tensor dot(segments, c);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t j = 0; j < c; ++j) dot(seg[i], j) += up[i * c + j] * y(i, j);
                    std::span<double> g = tp.grad_buffer(ia);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t j = 0; j < c; ++j)
                        g[i * c + j] += y(i, j) * (up[i * c + j] - dot(seg[i], j));
                  });
}

Var row_softmax(Var a) {
  const Tensor& x = tape_of(a, "row_softmax").value(a);
  if (x.cols() == 0 || x.rows() == 0) {
    throw std::invalid_argument("row_softmax: empty input " + x.shape_string());
  }
  // Softmax of each row equals a single-segment column softmax of the transpose.
  std::vector<std::uint32_t> seg(x.cols(), 0);
  return transpose(segment_softmax(transpose(a), seg, 1));
}

Var mean_rows(Var a) {
  const Tensor& x = tape_of(a, "mean_rows").value(a);
  if (x.rows() == 0) throw std::invalid_argument("mean_rows: no rows");
  std::vector<std::uint32_t> seg(x.rows(), 0);
  return segment_mean(a, seg, 1);
}

Var leaky_relu(Var a, double slope) {
  return unary(
      a, "leaky_relu", [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Var elu(Var a) {
  return unary(
      a, "elu", [](double v) { return v > 0.0 ? v : std::expm1(v); },
      [](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
}

Var tanh(Var a) {
  return unary(
      a, "tanh", [](double v) { return std::tanh(v); },
      [](double v) {
        const double th = std::tanh(v);
        return 1.0 - th * th;
      });
}

namespace {
double stable_sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}
}  // namespace

Var sigmoid(Var a) {
  return unary(a, "sigmoid", stable_sigmoid, [](double v) {
    const double s = stable_sigmoid(v);
    return s * (1.0 - s);
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a, "sum");
  const Tensor& x = a.value();
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const std::size_t ia = a.id;
  return t.record(Tensor(1, 1, acc), {ia}, [ia](Tape& tp, std::span<const double> up) {
    std::span<double> g = tp.grad_buffer(ia);
    for (double& v : g) v += up[0];
  });
}

Var squared_norm(Var a) {
  Tape& t = tape_of(a, "squared_norm");
  const Tensor& x = a.value();
  double acc = 0.0;
  for (double v : x.data()) acc += v * v;
  const std::size_t ia = a.id;
  return t.record(Tensor(1, 1, acc), {ia}, [ia](Tape& tp, std::span<const double> up) {
    const Tensor& xv = tp.value(Var{&tp, ia});
    std::span<double> g = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * up[0] * xv[i];
  });
}

}  // namespace hcmgnn::num
