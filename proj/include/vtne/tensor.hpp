#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include <cblas.h>
#include <lapacke.h>

#include "vtne/common.hpp"

namespace vtne {

/// Dense complex tensor. Values are stored row-major over the listed shape;
/// every index permutation is an explicit data movement.
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(element_count(shape_), cplx{0.0, 0.0}) {}

  DenseTensor(std::vector<std::size_t> shape, std::vector<cplx> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_)) {
      throw shape_error("DenseTensor: data size does not match shape");
    }
  }

  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d == 0) throw shape_error("DenseTensor: zero dimension");
      n *= d;
    }
    return n;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& data() { return data_; }
  const cplx* raw() const { return data_.data(); }
  cplx* raw() { return data_.data(); }

  cplx& operator[](std::size_t flat) { return data_[flat]; }
  const cplx& operator[](std::size_t flat) const { return data_[flat]; }

  /// Flat offset of a multi-index (row-major).
  std::size_t offset(const std::vector<std::size_t>& idx) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) off = off * shape_[k] + idx[k];
    return off;
  }

  cplx& at(const std::vector<std::size_t>& idx) { return data_[offset(idx)]; }
  const cplx& at(const std::vector<std::size_t>& idx) const { return data_[offset(idx)]; }

  /// Same data, new shape (element count must match).
  DenseTensor reshaped(std::vector<std::size_t> shape) const {
    if (element_count(shape) != data_.size()) {
      throw shape_error("reshape: element count mismatch");
    }
    return DenseTensor(std::move(shape), data_);
  }

  /// New tensor with axes reordered so that axis k of the result is
  /// axis perm[k] of *this.
  DenseTensor permuted(const std::vector<std::size_t>& perm) const {
    if (perm.size() != shape_.size()) throw shape_error("permute: rank mismatch");
    const std::size_t r = rank();
    std::vector<std::size_t> new_shape(r), old_strides(r), new_strides_in_old(r);
    std::size_t stride = 1;
    for (std::size_t k = r; k-- > 0;) {
      old_strides[k] = stride;
      stride *= shape_[k];
    }
    for (std::size_t k = 0; k < r; ++k) {
      new_shape[k] = shape_[perm[k]];
      new_strides_in_old[k] = old_strides[perm[k]];
    }
    DenseTensor out(new_shape);
    std::vector<std::size_t> idx(r, 0);
    const std::size_t n = data_.size();
    std::size_t src = 0;
    for (std::size_t flat = 0; flat < n; ++flat) {
      out.data_[flat] = data_[src];
      for (std::size_t k = r; k-- > 0;) {
        ++idx[k];
        src += new_strides_in_old[k];
        if (idx[k] < new_shape[k]) break;
        src -= new_strides_in_old[k] * new_shape[k];
        idx[k] = 0;
      }
    }
    return out;
  }

  DenseTensor conjugated() const {
    DenseTensor out(shape_, data_);
    for (cplx& z : out.data_) z = std::conj(z);
    return out;
  }

  double norm() const {
    double s = 0;
    for (const cplx& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  DenseTensor& scale(cplx a) {
    for (cplx& z : data_) z *= a;
    return *this;
  }

  void ensure_finite(const char* context) const {
    for (const cplx& z : data_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw numerical_integrity_error(std::string("non-finite value in ") + context);
      }
    }
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<cplx> data_;
};

namespace detail {

inline void gemm(const cplx* a, const cplx* b, cplx* c, std::size_t m, std::size_t k,
                 std::size_t n) {
  const cplx one{1.0, 0.0}, zero{0.0, 0.0};
  cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), &one, a, static_cast<int>(k), b,
              static_cast<int>(n), &zero, c, static_cast<int>(n));
}

}  // namespace detail

/// Pairwise contraction: sums over pairs.first (axis of a) against
/// pairs.second (axis of b). Result carries the unpaired axes of a, then the
/// unpaired axes of b, in their original order.
inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  for (const auto& [ia, ib] : pairs) {
    if (ia >= a.rank() || ib >= b.rank()) throw shape_error("contract: axis out of range");
    if (a.dim(ia) != b.dim(ib)) throw shape_error("contract: paired dimensions differ");
  }
  std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
  for (const auto& [ia, ib] : pairs) {
    if (a_used[ia] || b_used[ib]) throw shape_error("contract: axis paired twice");
    a_used[ia] = true;
    b_used[ib] = true;
  }

  std::vector<std::size_t> a_perm, b_perm, out_shape;
  std::size_t m = 1, k = 1, n = 1;
  for (std::size_t ax = 0; ax < a.rank(); ++ax) {
    if (!a_used[ax]) {
      a_perm.push_back(ax);
      m *= a.dim(ax);
      out_shape.push_back(a.dim(ax));
    }
  }
  for (const auto& [ia, ib] : pairs) {
    a_perm.push_back(ia);
    k *= a.dim(ia);
  }
  for (const auto& [ia, ib] : pairs) b_perm.push_back(ib);
  for (std::size_t ax = 0; ax < b.rank(); ++ax) {
    if (!b_used[ax]) {
      b_perm.push_back(ax);
      n *= b.dim(ax);
      out_shape.push_back(b.dim(ax));
    }
  }

  DenseTensor am = a.permuted(a_perm);
  DenseTensor bm = b.permuted(b_perm);
  if (out_shape.empty()) out_shape.push_back(1);  // scalar result kept rank-1
  DenseTensor out(out_shape);
  detail::gemm(am.raw(), bm.raw(), out.raw(), m, k, n);
  out.ensure_finite("contract");
  return out;
}

/// Result of a capped singular value decomposition of a matrix:
/// m ~= u * diag(s) * v with u (rows x kept) and v (kept x cols) isometries.
/// discarded_weight = (sum of squared dropped singular values) / (total).
struct TruncatedSVD {
  DenseTensor u;
  std::vector<double> s;
  DenseTensor v;
  double discarded_weight = 0.0;

  std::size_t kept() const { return s.size(); }

  /// u * diag(s), as a matrix; convenient when absorbing the spectrum left.
  DenseTensor us() const {
    DenseTensor out = u;
    const std::size_t rows = u.dim(0), cols = s.size();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= s[c];
    return out;
  }

  /// diag(s) * v.
  DenseTensor sv() const {
    DenseTensor out = v;
    const std::size_t rows = s.size(), cols = v.dim(1);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= s[r];
    return out;
  }
};

/// Truncated SVD of a rank-2 tensor. Keeps at most `cap` singular values and
/// additionally drops values below cutoff * max(s). A zero matrix yields an
/// empty spectrum with discarded_weight 0.
inline TruncatedSVD svd_truncate(const DenseTensor& m, std::size_t cap,
                                 double cutoff = kSvdCutoff) {
  if (m.rank() != 2) throw shape_error("svd_truncate: rank-2 tensor required");
  if (cap == 0) throw argument_error("svd_truncate: cap must be positive");
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  const std::size_t kmax = std::min(rows, cols);

  std::vector<cplx> work = m.data();
  std::vector<double> s(kmax);
  std::vector<cplx> u(rows * kmax), vt(kmax * cols);

  int info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'S', static_cast<int>(rows),
                            static_cast<int>(cols),
                            reinterpret_cast<lapack_complex_double*>(work.data()),
                            static_cast<int>(cols), s.data(),
                            reinterpret_cast<lapack_complex_double*>(u.data()),
                            static_cast<int>(kmax),
                            reinterpret_cast<lapack_complex_double*>(vt.data()),
                            static_cast<int>(cols));
  if (info != 0) {
    // divide-and-conquer occasionally fails to converge; QR-based is sturdier
    work = m.data();
    std::vector<double> superb(kmax);
    info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'S', 'S', static_cast<int>(rows),
                          static_cast<int>(cols),
                          reinterpret_cast<lapack_complex_double*>(work.data()),
                          static_cast<int>(cols), s.data(),
                          reinterpret_cast<lapack_complex_double*>(u.data()),
                          static_cast<int>(kmax),
                          reinterpret_cast<lapack_complex_double*>(vt.data()),
                          static_cast<int>(cols), superb.data());
    if (info != 0) throw numerical_integrity_error("svd_truncate: SVD failed to converge");
  }

  double total = 0.0;
  for (double x : s) total += x * x;

  std::size_t keep = std::min(cap, kmax);
  const double floor = (total > 0.0) ? cutoff * s[0] : 0.0;
  while (keep > 0 && s[keep - 1] <= floor) --keep;

  double kept_sq = 0.0;
  for (std::size_t i = 0; i < keep; ++i) kept_sq += s[i] * s[i];

  TruncatedSVD out;
  out.s.assign(s.begin(), s.begin() + keep);
  out.discarded_weight = (total > 0.0) ? std::max(0.0, (total - kept_sq) / total) : 0.0;
  out.u = DenseTensor({rows, std::max<std::size_t>(keep, 1)});
  out.v = DenseTensor({std::max<std::size_t>(keep, 1), cols});
  if (keep == 0) return out;  // zero matrix: u/v left as zero blocks, s empty
  out.u = DenseTensor({rows, keep});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < keep; ++c) out.u[r * keep + c] = u[r * kmax + c];
  out.v = DenseTensor({keep, cols});
  for (std::size_t r = 0; r < keep; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.v[r * cols + c] = vt[r * cols + c];
  out.u.ensure_finite("svd_truncate");
  out.v.ensure_finite("svd_truncate");
  return out;
}

}  // namespace vtne
