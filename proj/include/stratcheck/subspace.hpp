#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stratcheck::subspace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct SubspaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Frame is rank-deficient where a full-rank one is required.
struct RankError : SubspaceError {
  using SubspaceError::SubspaceError;
};

/// Ordered spanning vectors; possibly linearly dependent.
class Frame {
 public:
  explicit Frame(int dim_ambient) : cols_(dim_ambient, 0) {
    if (dim_ambient < 1) throw SubspaceError("ambient dimension must be >= 1");
  }

  explicit Frame(Mat cols) : cols_(std::move(cols)) {
    if (cols_.rows() < 1) throw SubspaceError("ambient dimension must be >= 1");
    if (!cols_.allFinite()) throw SubspaceError("frame vectors must be finite");
  }

  explicit Frame(const std::vector<Vec>& vectors) {
    if (vectors.empty()) throw SubspaceError("cannot infer ambient dimension from an empty vector list");
    cols_.resize(vectors[0].size(), static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (vectors[i].size() != cols_.rows()) throw SubspaceError("frame vectors must share a dimension");
      cols_.col(static_cast<Eigen::Index>(i)) = vectors[i];
    }
    if (!cols_.allFinite()) throw SubspaceError("frame vectors must be finite");
  }

  int dim_ambient() const { return static_cast<int>(cols_.rows()); }
  int count() const { return static_cast<int>(cols_.cols()); }
  const Mat& matrix() const { return cols_; }
  Vec vector(int i) const { return cols_.col(i); }

  void push_back(const Vec& v) {
    if (v.size() != cols_.rows()) throw SubspaceError("frame vectors must share a dimension");
    if (!v.allFinite()) throw SubspaceError("frame vectors must be finite");
    cols_.conservativeResize(Eigen::NoChange, cols_.cols() + 1);
    cols_.col(cols_.cols() - 1) = v;
  }

  double max_norm() const {
    double m = 0.0;
    for (Eigen::Index j = 0; j < cols_.cols(); ++j) m = std::max(m, cols_.col(j).norm());
    return m;
  }

 private:
  Mat cols_;
};

/// Orthonormal plane through the origin.
class Subspace {
 public:
  static Subspace from_orthonormal(Mat basis) {
    if (basis.rows() < 1) throw SubspaceError("ambient dimension must be >= 1");
    const Mat g = basis.transpose() * basis;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j)
        if (std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) > 1e-12)
          throw SubspaceError("basis is not orthonormal within 1e-12");
    return Subspace(std::move(basis));
  }

  static Subspace zero(int dim_ambient) { return Subspace(Mat(dim_ambient, 0)); }

  int dim() const { return static_cast<int>(basis_.cols()); }
  int ambient() const { return static_cast<int>(basis_.rows()); }
  const Mat& basis() const { return basis_; }

  Vec project(const Vec& v) const {
    require_dim(v);
    if (dim() == 0) return Vec::Zero(v.size());
    return basis_ * (basis_.transpose() * v);
  }

  double dist(const Vec& v) const { return (v - project(v)).norm(); }

  Mat projector() const { return basis_ * basis_.transpose(); }

 private:
  explicit Subspace(Mat basis) : basis_(std::move(basis)) {}

  void require_dim(const Vec& v) const {
    if (v.size() != basis_.rows()) throw SubspaceError("vector dimension does not match the ambient space");
  }

  friend Subspace orthonormalize(const Frame&, double);
  friend Subspace orthogonal_complement(const Subspace&);
  friend Subspace intersection(const Subspace&, const Subspace&, double);

  Mat basis_;
};

struct GapResult {
  double gap = 0.0;           // in [0, 1]
  Vec attaining_vector;       // unit vector of the first subspace realizing it
};

/// Modified Gram-Schmidt with a second orthogonalization pass; residuals with
/// norm <= tol * (largest input norm) are dropped (the rank decision).
inline Subspace orthonormalize(const Frame& fr, double tol = 1e-10) {
  if (tol <= 0.0) throw SubspaceError("orthonormalize needs tol > 0");
  if (fr.count() == 0) throw SubspaceError("cannot orthonormalize an empty frame");
  const double threshold = tol * fr.max_norm();
  Mat basis(fr.dim_ambient(), 0);
  for (int j = 0; j < fr.count(); ++j) {
    Vec w = fr.vector(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index q = 0; q < basis.cols(); ++q) w -= basis.col(q).dot(w) * basis.col(q);
    const double n = w.norm();
    if (n > threshold) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = w / n;
    }
  }
  return Subspace(std::move(basis));
}

namespace detail {

/// Columns sorted by entry-wise lexicographic order: makes least-squares
/// residuals bitwise independent of the caller's vector order.
inline Mat canonical_columns(const Mat& a) {
  std::vector<int> idx(static_cast<std::size_t>(a.cols()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&a](int i, int j) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (a(r, i) < a(r, j)) return true;
      if (a(r, i) > a(r, j)) return false;
    }
    return false;
  });
  Mat out(a.rows(), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = a.col(idx[i]);
  return out;
}

/// Least-squares projection of v onto the column span (rank-deficient safe).
inline Vec project_onto_columns(const Mat& a, const Vec& v) {
  if (a.cols() == 0) return Vec::Zero(v.size());
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
  return a * cod.solve(v);
}

}  // namespace detail

/// Euclidean distance from v to span(fr); |v| when the span is {0}.
inline double dist_to_span(const Vec& v, const Frame& fr) {
  if (v.size() != fr.dim_ambient()) throw SubspaceError("vector dimension does not match the frame");
  if (fr.count() == 0) return v.norm();
  const Mat a = detail::canonical_columns(fr.matrix());
  return (v - detail::project_onto_columns(a, v)).norm();
}

/// kappa(v_1..v_p) = min_i d(v_i, span of the others); the norm when p = 1.
inline double kuo_distance(const Frame& fr) {
  const int p = fr.count();
  if (p < 1) throw SubspaceError("kuo_distance needs at least one vector");
  if (p == 1) return fr.vector(0).norm();
  const int m = fr.dim_ambient();
  double best = std::numeric_limits<double>::infinity();
  Mat others(m, p - 1);
  for (int i = 0; i < p; ++i) {
    int k = 0;
    for (int j = 0; j < p; ++j)
      if (j != i) others.col(k++) = fr.vector(j);
    best = std::min(best, dist_to_span(fr.vector(i), Frame(others)));
  }
  return best;
}

/// N_j = v_j minus its projection onto span of the other vectors. Refuses
/// frames with kappa <= kappa_floor_rel * max norm: the downstream projection
/// formula divides by |N_j|^2.
inline Frame elimination_basis(const Frame& fr, double kappa_floor_rel = 1e-12) {
  const int p = fr.count();
  if (p < 1) throw SubspaceError("elimination_basis needs at least one vector");
  const int m = fr.dim_ambient();
  Mat out(m, p);
  double kappa = std::numeric_limits<double>::infinity();
  Mat others(m, p - 1);
  for (int i = 0; i < p; ++i) {
    int k = 0;
    for (int j = 0; j < p; ++j)
      if (j != i) others.col(k++) = fr.vector(j);
    const Mat a = detail::canonical_columns(others);
    const Vec nj = fr.vector(i) - detail::project_onto_columns(a, fr.vector(i));
    out.col(i) = nj;
    kappa = std::min(kappa, nj.norm());
  }
  if (kappa <= kappa_floor_rel * fr.max_norm())
    throw RankError("elimination basis undefined: kappa = " + std::to_string(kappa) + " is below tolerance");
  return Frame(std::move(out));
}

/// v(x) = sum_j <x, v_j> N_j / |N_j|^2; contract: the orthogonal projection
/// of x onto span(fr) when nbasis = elimination_basis(fr).
inline Vec kuo_projection(const Vec& x, const Frame& fr, const Frame& nbasis) {
  if (fr.count() != nbasis.count()) throw SubspaceError("frame and elimination basis sizes differ");
  if (x.size() != fr.dim_ambient() || nbasis.dim_ambient() != fr.dim_ambient())
    throw SubspaceError("dimension mismatch in kuo_projection");
  Vec acc = Vec::Zero(x.size());
  for (int j = 0; j < fr.count(); ++j) {
    const Vec nj = nbasis.vector(j);
    const double n2 = nj.squaredNorm();
    if (n2 == 0.0) throw RankError("kuo_projection: zero N_j");
    acc += (x.dot(fr.vector(j)) / n2) * nj;
  }
  return acc;
}

/// Largest distance from a unit vector of l to w: the sine of the largest
/// principal angle, realized by the matching principal direction of l.
inline GapResult gap(const Subspace& l, const Subspace& w) {
  if (l.ambient() != w.ambient()) throw SubspaceError("gap needs subspaces of one ambient space");
  if (l.dim() > w.dim()) throw SubspaceError("gap requires dim(l) <= dim(w)");
  GapResult res;
  if (l.dim() == 0) {
    res.attaining_vector = Vec::Zero(l.ambient());
    return res;
  }
  // Residual matrix (I - P_w) B_l: singular values are the principal sines.
  const Mat s = l.basis() - w.basis() * (w.basis().transpose() * l.basis());
  Eigen::JacobiSVD<Mat> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  res.gap = std::min(1.0, svd.singularValues()(0));
  Vec v = l.basis() * svd.matrixV().col(0);
  const double n = v.norm();
  res.attaining_vector = (n > 0.0) ? Vec(v / n) : v;
  return res;
}

/// Principal angles, non-decreasing, length min(dim a, dim b). Small angles
/// come from the sine (residual) route, large ones from the cosine route.
inline std::vector<double> principal_angles(const Subspace& a, const Subspace& b) {
  if (a.ambient() != b.ambient()) throw SubspaceError("principal_angles needs one ambient space");
  const int k = std::min(a.dim(), b.dim());
  if (k == 0) return {};
  const Subspace& small = (a.dim() <= b.dim()) ? a : b;
  const Subspace& large = (a.dim() <= b.dim()) ? b : a;
  Eigen::JacobiSVD<Mat> cos_svd(Mat(large.basis().transpose() * small.basis()));
  const Mat resid = small.basis() - large.basis() * (large.basis().transpose() * small.basis());
  Eigen::JacobiSVD<Mat> sin_svd(resid);
  std::vector<double> angles(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double c = std::clamp(cos_svd.singularValues()(i), 0.0, 1.0);           // descending
    const double sv = std::clamp(sin_svd.singularValues()(k - 1 - i), 0.0, 1.0);  // ascending
    angles[static_cast<std::size_t>(i)] = (c * c > 0.5) ? std::asin(sv) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

/// Count of principal angles <= angle_tol.
inline int intersection_dim(const Subspace& a, const Subspace& b, double angle_tol = 1e-7) {
  if (!(angle_tol > 0.0 && angle_tol < 0.78539816339744830962)) throw SubspaceError("angle_tol must lie in (0, pi/4)");
  int n = 0;
  for (double th : principal_angles(a, b))
    if (th <= angle_tol) ++n;
  return n;
}

/// Orthonormal basis of the near-intersection: principal directions of the
/// lower-dimensional subspace whose angle is <= angle_tol.
inline Subspace intersection(const Subspace& a, const Subspace& b, double angle_tol = 1e-7) {
  if (a.ambient() != b.ambient()) throw SubspaceError("intersection needs one ambient space");
  const Subspace& small = (a.dim() <= b.dim()) ? a : b;
  const Subspace& large = (a.dim() <= b.dim()) ? b : a;
  if (small.dim() == 0) return Subspace::zero(a.ambient());
  const Mat resid = small.basis() - large.basis() * (large.basis().transpose() * small.basis());
  Eigen::JacobiSVD<Mat> svd(resid, Eigen::ComputeThinV);
  const double sin_tol = std::sin(angle_tol);
  const int k = static_cast<int>(svd.singularValues().size());
  Mat sel(a.ambient(), 0);
  for (int i = k - 1; i >= 0; --i) {  // ascending singular values
    if (svd.singularValues()(i) > sin_tol) break;
    sel.conservativeResize(Eigen::NoChange, sel.cols() + 1);
    sel.col(sel.cols() - 1) = small.basis() * svd.matrixV().col(i);
  }
  return Subspace(std::move(sel));
}

/// Orthogonal complement via the trailing Householder Q columns.
inline Subspace orthogonal_complement(const Subspace& a) {
  const int m = a.ambient();
  const int k = a.dim();
  if (k == 0) return Subspace(Mat::Identity(m, m));
  if (k == m) return Subspace::zero(m);
  Eigen::HouseholderQR<Mat> qr(a.basis());
  const Mat q = qr.householderQ();
  return Subspace(q.rightCols(m - k));
}

/// Line through v; v must be nonzero.
inline Subspace line_through(const Vec& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw SubspaceError("line_through needs a nonzero vector");
  Mat b(v.size(), 1);
  b.col(0) = v / n;
  return Subspace::from_orthonormal(std::move(b));
}

}  // namespace stratcheck::subspace
