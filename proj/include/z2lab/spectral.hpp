#pragma once

#include <Eigen/Sparse>
#include <optional>
#include <string>
#include <vector>

#include "z2lab/cover.hpp"
#include "z2lab/mesh.hpp"

namespace z2lab {

/// One real value per mesh vertex, read through the sign cocycle; values
/// at branch vertices are exactly zero.
struct TwistedSection {
  Eigen::VectorXd values;
};

struct EigenResult {
  double eigenvalue = 0.0;
  TwistedSection section;
  double residual = 0.0;  // ||K x - E M x||_{M^-1} / ||x||_M
  int iterations = 0;
  int level = 0;
  std::vector<double> extra_eigenvalues;  // when more pairs were requested
};

/// Twisted stiffness K and lumped mass M on the full vertex set, plus the
/// Dirichlet bookkeeping for the branch vertices. K couples vertices by
/// -w_ij * sigma_ij; rows and columns of branch vertices are constrained
/// out when solving.
struct TwistedOperators {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;  // diagonal lumped areas
  std::vector<int> free_vertices;       // non-branch vertex ids
  std::vector<int> full_to_free;        // -1 for branch vertices
};

TwistedOperators assemble(const SphereMesh& mesh, const MeshTables& tables,
                          const SignCocycle& cocycle);

/// Orthogonal projector onto the symmetric sector: the average of the
/// character-weighted lifted group action generated by the (-1, a_p) and
/// the deck element. Applies in O(|G| * V).
class SectorProjector {
 public:
  SectorProjector(const std::vector<LiftedSymmetry>& generators, int vertex_count,
                  const std::vector<int>& branch_vertices);

  Eigen::VectorXd apply(const Eigen::VectorXd& full_values) const;
  int group_order() const { return static_cast<int>(elements_.size()); }

 private:
  struct Element {
    std::vector<int> inverse_perm;
    std::vector<std::int8_t> sign;  // on free vertices only
    int chi = 1;
  };
  std::vector<Element> elements_;
  std::vector<char> is_branch_;
};

struct SolveOptions {
  double tol = 1e-9;
  int max_iterations = 5000;
  unsigned seed = 1;
  int count = 1;       // eigenpairs to report
  int block_size = 0;  // 0: automatic
};

/// Smallest eigenvalue(s) of the pencil (K, M) over twisted sections, or
/// over the range of the projector when one is supplied. Blocked inverse
/// iteration with M-orthonormalization and Rayleigh-Ritz extraction,
/// seeded deterministically.
EigenResult solve_lowest(const TwistedOperators& ops, const SectorProjector* projector,
                         const SolveOptions& options = {});

/// Largest value of (int_A |f|^2) / (int_A |df|^2) over discrete twisted
/// sections supported on the annulus delta < dist(x, p) < rho around
/// branch point `branch_index`. With `filter_below_mode` = N, restricts to
/// sections whose circle modes with |n + 1/2| < N + 1/2 vanish on a ladder
/// of sampling circles. Lemma-style bound: 4 rho^2 / (2N+1)^2.
double annulus_inequality_check(const SphereMesh& mesh, const MeshTables& tables,
                                const SignCocycle& cocycle, int branch_index, double delta,
                                double rho, std::optional<int> filter_below_mode = {});

/// Lowest eigenvalue of the 1d twisted (Moebius) circle Laplacian on n
/// equispaced points: second differences with one sign-flipped wrap-around
/// coupling. Converges to 1/4.
double moebius_circle_lowest_eigenvalue(int n);

/// Coordinate-format export "row col value" of the reduced operators.
std::string operators_to_coordinate_text(const TwistedOperators& ops);

}  // namespace z2lab
