#pragma once

#include "torsol/rational.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace torsol {

struct PolytopeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A full-dimensional lattice polytope Q with the origin strictly interior.
/// Its vertices double as the facet normals of the dual polytope.
struct LatticePolytope {
  int dim = 0;
  std::vector<IntVec> vertices;
  // Faces of codimension 1 of Q, each as a list of vertex indices.
  std::vector<std::vector<int>> facet_complex;
};

/// Full-dimensional simplex stored by its n+1 vertices (exact coordinates).
struct Simplex {
  std::vector<RatVec> verts;
};

/// Half-space description l_i(y) = <y, n^(i)> + 1 >= 0 together with exact
/// vertices and a fan triangulation from the origin.
struct DualPolytope {
  int dim = 0;
  std::vector<IntVec> facet_normals;            // one per vertex of Q, same order
  std::vector<RatVec> vertices;                 // lexicographically sorted, deduplicated
  std::vector<std::vector<int>> facet_vertices; // vertex indices on facet i
  std::vector<Simplex> triangulation;           // full-dimensional simplices

  Rational l(int facet, const RatVec& y) const {
    Rational acc(1);
    for (int k = 0; k < dim; ++k) acc += y(k) * Rational(facet_normals[facet](k));
    return acc;
  }
};

struct FanoReport {
  bool is_fano = false;
  bool origin_interior = false;
  bool vertices_primitive = false;
  bool faces_simplicial = false;
  bool is_gorenstein = false;
  long long gorenstein_index = 1;
  std::vector<std::string> failures;
  std::vector<std::string> notes;
};

/// Parse a polytope document {"dim": n, "vertices": [[...],...]}.
/// Throws PolytopeError on malformed input, non-integer coordinates,
/// duplicate or non-extreme vertices, or whenever the origin is not strictly
/// interior to the convex hull.
LatticePolytope parse_polytope(const std::string& text);

FanoReport validate_toric_fano(const LatticePolytope& Q);

DualPolytope dual_polytope(const LatticePolytope& Q);

/// (all dual vertices integral, least k >= 1 with k*vertices integral).
std::pair<bool, long long> is_gorenstein(const DualPolytope& P);

/// Exact volume-weighted centroid of P.
RatVec barycenter(const DualPolytope& P);

/// v(x) = max_k <x, p^(k)> over the dual vertices.
double support_function(const DualPolytope& P, const Eigen::VectorXd& x);

namespace detail {

/// One support facet of a point set: outward normal and offset with
/// <normal, p> <= offset for all points, plus the tight point indices.
struct HullFacet {
  RatVec normal;
  Rational offset;
  std::vector<int> tight;
};

/// Enumerate the support facets of conv(points) by brute force over
/// n-subsets. Requires a full-dimensional point set.
std::vector<HullFacet> hull_facets(const std::vector<RatVec>& points, int dim);

/// Affine dimension of a point set.
int affine_rank(const std::vector<RatVec>& points, int dim);

/// Triangulate a polytope given by the exact vertex list of its convex hull;
/// `adim` is the affine dimension. Fans from the first vertex recursively.
std::vector<std::vector<RatVec>> triangulate_vertices(const std::vector<RatVec>& points,
                                                      int dim, int adim);

/// Vertex enumeration for {y : <y, a_i> + 1 >= 0} with rational normals.
std::vector<RatVec> enumerate_dual_vertices(const std::vector<RatVec>& normals, int dim);

}  // namespace detail

}  // namespace torsol
