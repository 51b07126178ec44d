#include "torsol/polytope.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace torsol {

Rational rat_det(RatMat A) {
  const Eigen::Index n = A.rows();
  if (n != A.cols()) throw std::invalid_argument("rat_det: square matrix required");
  Rational det(1);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = -1;
    for (Eigen::Index r = col; r < n; ++r)
      if (A(r, col) != 0) { pivot = r; break; }
    if (pivot < 0) return Rational(0);
    if (pivot != col) {
      A.row(pivot).swap(A.row(col));
      det = -det;
    }
    det *= A(col, col);
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (A(r, col) == 0) continue;
      Rational f = A(r, col) / A(col, col);
      for (Eigen::Index c = col; c < n; ++c) A(r, c) -= f * A(col, c);
    }
  }
  return det;
}

int rat_rank(RatMat A) {
  const Eigen::Index rows = A.rows(), cols = A.cols();
  int rank = 0;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < cols && row < rows; ++col) {
    Eigen::Index pivot = -1;
    for (Eigen::Index r = row; r < rows; ++r)
      if (A(r, col) != 0) { pivot = r; break; }
    if (pivot < 0) continue;
    if (pivot != row) A.row(pivot).swap(A.row(row));
    for (Eigen::Index r = row + 1; r < rows; ++r) {
      if (A(r, col) == 0) continue;
      Rational f = A(r, col) / A(row, col);
      for (Eigen::Index c = col; c < cols; ++c) A(r, c) -= f * A(row, c);
    }
    ++row;
    ++rank;
  }
  return rank;
}

std::optional<RatVec> rat_solve(RatMat A, RatVec b) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.size() != n) throw std::invalid_argument("rat_solve: shape mismatch");
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = -1;
    for (Eigen::Index r = col; r < n; ++r)
      if (A(r, col) != 0) { pivot = r; break; }
    if (pivot < 0) return std::nullopt;
    if (pivot != col) {
      A.row(pivot).swap(A.row(col));
      std::swap(b(pivot), b(col));
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col || A(r, col) == 0) continue;
      Rational f = A(r, col) / A(col, col);
      for (Eigen::Index c = col; c < n; ++c) A(r, c) -= f * A(col, c);
      b(r) -= f * b(col);
    }
  }
  RatVec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = b(i) / A(i, i);
  return x;
}

std::optional<RatVec> rat_kernel_vector(RatMat A) {
  const Eigen::Index rows = A.rows(), cols = A.cols();
  std::vector<Eigen::Index> pivot_col;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < cols && row < rows; ++col) {
    Eigen::Index pivot = -1;
    for (Eigen::Index r = row; r < rows; ++r)
      if (A(r, col) != 0) { pivot = r; break; }
    if (pivot < 0) continue;
    if (pivot != row) A.row(pivot).swap(A.row(row));
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (r == row || A(r, col) == 0) continue;
      Rational f = A(r, col) / A(row, col);
      for (Eigen::Index c = col; c < cols; ++c) A(r, c) -= f * A(row, c);
    }
    pivot_col.push_back(col);
    ++row;
  }
  if (static_cast<Eigen::Index>(pivot_col.size()) != cols - 1) return std::nullopt;
  // the one free column parametrizes the kernel
  Eigen::Index free_col = -1;
  {
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivot_col) is_pivot[c] = true;
    for (Eigen::Index c = 0; c < cols; ++c)
      if (!is_pivot[c]) { free_col = c; break; }
  }
  RatVec k = RatVec::Zero(cols);
  k(free_col) = 1;
  for (std::size_t r = 0; r < pivot_col.size(); ++r)
    k(pivot_col[r]) = -A(r, free_col) / A(r, pivot_col[r]);
  return k;
}

namespace detail {

int affine_rank(const std::vector<RatVec>& points, int dim) {
  if (points.empty()) return -1;
  RatMat D(static_cast<Eigen::Index>(points.size()) - 1, dim);
  for (std::size_t i = 1; i < points.size(); ++i)
    D.row(static_cast<Eigen::Index>(i - 1)) = (points[i] - points[0]).transpose();
  return rat_rank(D);
}

namespace {

// integer-primitive normalization of a rational vector (facet dedup key)
RatVec normalize_primitive(const RatVec& v) {
  BigInt l(1);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    l = boost::multiprecision::lcm(l, denominator(v(i)));
  BigInt g(0);
  std::vector<BigInt> ints(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    ints[i] = numerator(v(i)) * (l / denominator(v(i)));
    g = boost::multiprecision::gcd(g, boost::multiprecision::abs(ints[i]));
  }
  RatVec out(v.size());
  if (g == 0) return RatVec::Zero(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = Rational(ints[i] / g);
  return out;
}

void subsets_rec(int start, int need, int total, std::vector<int>& cur,
                 const std::function<void(const std::vector<int>&)>& fn) {
  if (need == 0) {
    fn(cur);
    return;
  }
  for (int i = start; i + need <= total; ++i) {
    cur.push_back(i);
    subsets_rec(i + 1, need - 1, total, cur, fn);
    cur.pop_back();
  }
}

void for_each_subset(int total, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> cur;
  subsets_rec(0, k, total, cur, fn);
}

}  // namespace

std::vector<HullFacet> hull_facets(const std::vector<RatVec>& points, int dim) {
  std::vector<HullFacet> facets;
  if (static_cast<int>(points.size()) < dim) return facets;
  std::map<std::vector<Rational>, bool> seen;

  for_each_subset(static_cast<int>(points.size()), dim, [&](const std::vector<int>& idx) {
    RatMat M(dim, dim + 1);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) M(r, c) = points[idx[r]](c);
      M(r, dim) = Rational(-1);
    }
    auto ker = rat_kernel_vector(M);
    if (!ker) return;
    RatVec a = ker->head(dim);
    Rational b = (*ker)(dim);
    bool a_zero = true;
    for (int c = 0; c < dim; ++c)
      if (a(c) != 0) { a_zero = false; break; }
    if (a_zero) return;

    bool has_pos = false, has_neg = false;
    for (const auto& p : points) {
      Rational s = a.dot(p) - b;
      if (s > 0) has_pos = true;
      if (s < 0) has_neg = true;
      if (has_pos && has_neg) return;
    }
    if (has_pos) {  // flip to outward orientation
      a = -a;
      b = -b;
    }

    RatVec key_vec(dim + 1);
    key_vec.head(dim) = a;
    key_vec(dim) = b;
    key_vec = normalize_primitive(key_vec);
    std::vector<Rational> key(key_vec.data(), key_vec.data() + dim + 1);
    if (seen.count(key)) return;
    seen[key] = true;

    HullFacet f;
    f.normal = key_vec.head(dim);
    f.offset = key_vec(dim);
    for (std::size_t i = 0; i < points.size(); ++i)
      if (f.normal.dot(points[i]) == f.offset) f.tight.push_back(static_cast<int>(i));
    facets.push_back(std::move(f));
  });
  return facets;
}

std::vector<RatVec> enumerate_dual_vertices(const std::vector<RatVec>& normals, int dim) {
  std::vector<RatVec> verts;
  const int d = static_cast<int>(normals.size());
  for_each_subset(d, dim, [&](const std::vector<int>& idx) {
    RatMat A(dim, dim);
    RatVec b(dim);
    for (int r = 0; r < dim; ++r) {
      A.row(r) = normals[idx[r]].transpose();
      b(r) = Rational(-1);
    }
    auto y = rat_solve(A, b);
    if (!y) return;
    for (const auto& a : normals) {
      if (a.dot(*y) + 1 < 0) return;  // infeasible
    }
    for (const auto& v : verts)
      if (rat_vec_eq(v, *y)) return;
    verts.push_back(*y);
  });
  std::sort(verts.begin(), verts.end(), lex_less);
  return verts;
}

std::vector<std::vector<RatVec>> triangulate_vertices(const std::vector<RatVec>& input,
                                                      int dim, int adim) {
  std::vector<RatVec> points = input;
  std::sort(points.begin(), points.end(), lex_less);
  std::vector<std::vector<RatVec>> out;

  if (adim == 0 || points.size() == static_cast<std::size_t>(adim) + 1) {
    out.push_back(points);
    return out;
  }
  if (adim == 1) {
    out.push_back({points.front(), points.back()});
    return out;
  }

  // affine chart onto R^adim
  const RatVec& p0 = points[0];
  RatMat basis(dim, adim);
  std::vector<int> pivot_rows;
  {
    int got = 0;
    RatMat probe(0, dim);
    for (std::size_t i = 1; i < points.size() && got < adim; ++i) {
      RatMat trial(got + 1, dim);
      if (got > 0) trial.topRows(got) = probe;
      trial.row(got) = (points[i] - p0).transpose();
      if (rat_rank(trial) == got + 1) {
        basis.col(got) = points[i] - p0;
        probe = trial;
        ++got;
      }
    }
    if (got != adim) throw PolytopeError("triangulation: affine dimension mismatch");
    // pivot rows: rows of `basis` forming an invertible adim x adim block
    RatMat B = basis;
    std::vector<int> rows(dim);
    std::iota(rows.begin(), rows.end(), 0);
    int row = 0;
    for (int col = 0; col < adim; ++col) {
      int pivot = -1;
      for (int r = row; r < dim; ++r)
        if (B(r, col) != 0) { pivot = r; break; }
      if (pivot < 0) throw PolytopeError("triangulation: degenerate basis");
      if (pivot != row) {
        B.row(pivot).swap(B.row(row));
        std::swap(rows[pivot], rows[row]);
      }
      for (int r = row + 1; r < dim; ++r) {
        if (B(r, col) == 0) continue;
        Rational f = B(r, col) / B(row, col);
        for (int c = col; c < adim; ++c) B(r, c) -= f * B(row, c);
      }
      ++row;
    }
    pivot_rows.assign(rows.begin(), rows.begin() + adim);
  }
  RatMat Bsq(adim, adim);
  for (int r = 0; r < adim; ++r)
    for (int c = 0; c < adim; ++c) Bsq(r, c) = basis(pivot_rows[r], c);

  std::vector<RatVec> local(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    RatVec rhs(adim);
    for (int r = 0; r < adim; ++r) rhs(r) = (points[i] - p0)(pivot_rows[r]);
    auto xi = rat_solve(Bsq, rhs);
    if (!xi) throw PolytopeError("triangulation: chart solve failed");
    local[i] = *xi;
  }

  auto facets = hull_facets(local, adim);
  for (const auto& f : facets) {
    bool apex_on_facet = false;
    for (int t : f.tight)
      if (t == 0) { apex_on_facet = true; break; }
    if (apex_on_facet) continue;
    std::vector<RatVec> sub;
    sub.reserve(f.tight.size());
    for (int t : f.tight) sub.push_back(points[t]);
    for (auto& s : triangulate_vertices(sub, dim, adim - 1)) {
      std::vector<RatVec> simplex;
      simplex.reserve(s.size() + 1);
      simplex.push_back(points[0]);
      for (auto& q : s) simplex.push_back(std::move(q));
      out.push_back(std::move(simplex));
    }
  }
  return out;
}

namespace {

// exact 2-D gift wrapping; returns hull vertex indices in CCW cyclic order
// starting at the lexicographic minimum, skipping edge-interior points
std::vector<int> gift_wrap_2d(const std::vector<RatVec>& pts) {
  const int m = static_cast<int>(pts.size());
  int start = 0;
  for (int i = 1; i < m; ++i)
    if (lex_less(pts[i], pts[start])) start = i;

  auto cross = [&](int o, int a, int b) -> Rational {
    return (pts[a](0) - pts[o](0)) * (pts[b](1) - pts[o](1)) -
           (pts[a](1) - pts[o](1)) * (pts[b](0) - pts[o](0));
  };
  auto dist2 = [&](int a, int b) -> Rational {
    RatVec d = pts[b] - pts[a];
    return d(0) * d(0) + d(1) * d(1);
  };

  std::vector<int> hull;
  int cur = start;
  do {
    hull.push_back(cur);
    int next = (cur + 1) % m;
    for (int cand = 0; cand < m; ++cand) {
      if (cand == cur) continue;
      Rational c = cross(cur, next, cand);
      if (c < 0 || (c == 0 && dist2(cur, cand) > dist2(cur, next))) next = cand;
    }
    cur = next;
    if (hull.size() > static_cast<std::size_t>(m) + 1)
      throw PolytopeError("gift wrapping failed to close");
  } while (cur != start);
  return hull;
}

}  // namespace
}  // namespace detail

LatticePolytope parse_polytope(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PolytopeError(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("vertices"))
    throw PolytopeError("document must carry \"dim\" and \"vertices\"");
  if (!doc["dim"].is_number_integer())
    throw PolytopeError("\"dim\" must be an integer");
  const long long dim_ll = doc["dim"].get<long long>();
  if (dim_ll < 1) throw PolytopeError("dim must be >= 1");
  const int n = static_cast<int>(dim_ll);

  if (!doc["vertices"].is_array() || doc["vertices"].empty())
    throw PolytopeError("\"vertices\" must be a non-empty array");

  LatticePolytope Q;
  Q.dim = n;
  for (const auto& row : doc["vertices"]) {
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw PolytopeError("each vertex must have exactly dim coordinates");
    IntVec v(n);
    for (int c = 0; c < n; ++c) {
      if (!row[c].is_number_integer())
        throw PolytopeError("vertex coordinates must be integers");
      v(c) = row[c].get<std::int64_t>();
    }
    Q.vertices.push_back(std::move(v));
  }

  for (std::size_t i = 0; i < Q.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < Q.vertices.size(); ++j)
      if (Q.vertices[i] == Q.vertices[j])
        throw PolytopeError("duplicate vertex in input");

  std::vector<RatVec> pts;
  pts.reserve(Q.vertices.size());
  for (const auto& v : Q.vertices) pts.push_back(to_rational(v));

  if (detail::affine_rank(pts, n) < n)
    throw PolytopeError("origin not interior: hull is not full-dimensional");

  auto facets = detail::hull_facets(pts, n);
  if (facets.empty()) throw PolytopeError("hull reconstruction produced no facets");
  for (const auto& f : facets)
    if (!(f.offset > 0))
      throw PolytopeError("origin not interior to the convex hull");

  // every listed point must be a genuine hull vertex
  for (std::size_t i = 0; i < Q.vertices.size(); ++i) {
    RatMat act(0, n);
    int rows = 0;
    for (const auto& f : facets) {
      if (std::find(f.tight.begin(), f.tight.end(), static_cast<int>(i)) == f.tight.end())
        continue;
      act.conservativeResize(rows + 1, n);
      act.row(rows++) = f.normal.transpose();
    }
    if (rows < n || rat_rank(act) < n) {
      std::ostringstream os;
      os << "input point " << i << " is not a vertex of the convex hull";
      throw PolytopeError(os.str());
    }
  }

  if (n == 2) {
    auto cyc = detail::gift_wrap_2d(pts);
    if (cyc.size() != Q.vertices.size())
      throw PolytopeError("input contains non-extreme points");  // unreachable after vertex check
    for (std::size_t k = 0; k < cyc.size(); ++k)
      Q.facet_complex.push_back({cyc[k], cyc[(k + 1) % cyc.size()]});
  } else {
    for (const auto& f : facets) Q.facet_complex.push_back(f.tight);
  }
  return Q;
}

FanoReport validate_toric_fano(const LatticePolytope& Q) {
  FanoReport rep;
  const int n = Q.dim;

  std::vector<RatVec> pts;
  for (const auto& v : Q.vertices) pts.push_back(to_rational(v));
  auto facets = detail::hull_facets(pts, n);
  rep.origin_interior = !facets.empty();
  for (const auto& f : facets)
    if (!(f.offset > 0)) rep.origin_interior = false;
  if (!rep.origin_interior) rep.failures.push_back("origin is not strictly interior");

  rep.vertices_primitive = true;
  for (std::size_t i = 0; i < Q.vertices.size(); ++i) {
    BigInt g(0);
    for (int c = 0; c < n; ++c) {
      std::int64_t a = Q.vertices[i](c);
      g = boost::multiprecision::gcd(g, BigInt(a < 0 ? -a : a));
    }
    if (g != 1) {
      rep.vertices_primitive = false;
      std::ostringstream os;
      os << "vertex " << i << " is not primitive (gcd " << g << ")";
      rep.failures.push_back(os.str());
    }
  }

  rep.faces_simplicial = true;
  for (std::size_t i = 0; i < Q.facet_complex.size(); ++i) {
    if (static_cast<int>(Q.facet_complex[i].size()) != n) {
      rep.faces_simplicial = false;
      std::ostringstream os;
      os << "facet " << i << " has " << Q.facet_complex[i].size() << " vertices, expected " << n;
      rep.failures.push_back(os.str());
    }
  }
  rep.notes.push_back(
      "simpliciality is checked on facets (exactly n vertices each); every lower face is a "
      "face of a simplicial facet and hence itself a simplex");

  rep.is_fano = rep.origin_interior && rep.vertices_primitive && rep.faces_simplicial;

  if (rep.origin_interior) {
    auto P = dual_polytope(Q);
    auto [gor, index] = is_gorenstein(P);
    rep.is_gorenstein = gor;
    rep.gorenstein_index = index;
  }
  return rep;
}

DualPolytope dual_polytope(const LatticePolytope& Q) {
  const int n = Q.dim;
  if (n < 1 || Q.vertices.empty()) throw PolytopeError("dual_polytope: invalid polytope");

  DualPolytope P;
  P.dim = n;
  P.facet_normals = Q.vertices;

  std::vector<RatVec> normals;
  for (const auto& v : Q.vertices) normals.push_back(to_rational(v));
  P.vertices = detail::enumerate_dual_vertices(normals, n);
  if (P.vertices.empty()) throw PolytopeError("dual polytope has no vertices (origin not interior?)");

  P.facet_vertices.resize(Q.vertices.size());
  for (std::size_t i = 0; i < Q.vertices.size(); ++i) {
    for (std::size_t k = 0; k < P.vertices.size(); ++k)
      if (P.l(static_cast<int>(i), P.vertices[k]) == 0)
        P.facet_vertices[i].push_back(static_cast<int>(k));
  }

  RatVec origin = RatVec::Zero(n);
  for (std::size_t i = 0; i < P.facet_vertices.size(); ++i) {
    std::vector<RatVec> fpts;
    for (int k : P.facet_vertices[i]) fpts.push_back(P.vertices[k]);
    if (static_cast<int>(fpts.size()) < n) continue;  // empty/degenerate dual facet
    for (auto& tri : detail::triangulate_vertices(fpts, n, n - 1)) {
      Simplex s;
      s.verts.reserve(n + 1);
      s.verts.push_back(origin);
      for (auto& q : tri) s.verts.push_back(std::move(q));
      P.triangulation.push_back(std::move(s));
    }
  }
  return P;
}

std::pair<bool, long long> is_gorenstein(const DualPolytope& P) {
  BigInt l(1);
  for (const auto& v : P.vertices)
    for (Eigen::Index c = 0; c < v.size(); ++c)
      l = boost::multiprecision::lcm(l, denominator(v(c)));
  bool integral = (l == 1);
  return {integral, l.convert_to<long long>()};
}

RatVec barycenter(const DualPolytope& P) {
  const int n = P.dim;
  Rational total(0);
  RatVec acc = RatVec::Zero(n);
  Rational nfact(1);
  for (int k = 2; k <= n; ++k) nfact *= k;

  for (const auto& s : P.triangulation) {
    RatMat E(n, n);
    for (int c = 0; c < n; ++c) E.col(c) = s.verts[c + 1] - s.verts[0];
    Rational vol = rat_det(E) / nfact;
    if (vol < 0) vol = -vol;
    RatVec centroid = RatVec::Zero(n);
    for (const auto& v : s.verts) centroid += v;
    centroid /= Rational(n + 1);
    acc += vol * centroid;
    total += vol;
  }
  if (total == 0) throw PolytopeError("barycenter: polytope has zero volume");
  return acc / total;
}

double support_function(const DualPolytope& P, const Eigen::VectorXd& x) {
  if (P.vertices.empty()) throw PolytopeError("support_function: no vertices");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : P.vertices) {
    double s = 0;
    for (Eigen::Index c = 0; c < x.size(); ++c) s += x(c) * p(c).convert_to<double>();
    best = std::max(best, s);
  }
  return best;
}

}  // namespace torsol
