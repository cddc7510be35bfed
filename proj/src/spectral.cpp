#include "z2lab/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "z2lab/local.hpp"

namespace z2lab {

TwistedOperators assemble(const SphereMesh& mesh, const MeshTables& tables,
                          const SignCocycle& cocycle) {
  if (static_cast<int>(cocycle.edge_sign.size()) != tables.edge_count()) {
    throw std::invalid_argument("cocycle does not match mesh tables");
  }
  const int nv = mesh.vertex_count();
  TwistedOperators ops;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(tables.edge_count() * 4);
  for (int e = 0; e < tables.edge_count(); ++e) {
    const auto [i, j] = tables.edges[e];
    const double w = tables.cotan_weight[e];
    const double s = cocycle.edge_sign[e];
    trip.emplace_back(i, j, -w * s);
    trip.emplace_back(j, i, -w * s);
    trip.emplace_back(i, i, w);
    trip.emplace_back(j, j, w);
  }
  ops.stiffness.resize(nv, nv);
  ops.stiffness.setFromTriplets(trip.begin(), trip.end());
  ops.mass = Eigen::Map<const Eigen::VectorXd>(tables.vertex_area.data(), nv);

  std::vector<char> is_branch(nv, 0);
  for (int v : mesh.branch_vertices) is_branch[v] = 1;
  ops.full_to_free.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (!is_branch[v]) {
      ops.full_to_free[v] = static_cast<int>(ops.free_vertices.size());
      ops.free_vertices.push_back(v);
    }
  }
  return ops;
}

SectorProjector::SectorProjector(const std::vector<LiftedSymmetry>& generators,
                                 int vertex_count, const std::vector<int>& branch_vertices) {
  is_branch_.assign(vertex_count, 0);
  for (int v : branch_vertices) is_branch_[v] = 1;
  int base = 0;
  while (base < vertex_count && is_branch_[base]) ++base;

  struct Raw {
    std::vector<int> perm;
    std::vector<std::int8_t> sign;
    int chi;
  };
  // Elements are identified by (permutation, sign at the base vertex): the
  // transported sign field is determined by these over a connected
  // punctured mesh.
  auto key_of = [&](const Raw& r) {
    return std::make_pair(r.perm, static_cast<int>(r.sign[base]));
  };
  std::map<std::pair<std::vector<int>, int>, int> seen;
  std::vector<Raw> elems;

  Raw identity;
  identity.perm.resize(vertex_count);
  for (int v = 0; v < vertex_count; ++v) identity.perm[v] = v;
  identity.sign.assign(vertex_count, 1);
  identity.chi = 1;
  seen.emplace(key_of(identity), 0);
  elems.push_back(std::move(identity));

  std::vector<Raw> gens;
  for (const auto& g : generators) {
    Raw r{g.permutation, g.vertex_sign, -1};
    for (int v : branch_vertices) r.sign[v] = 1;
    gens.push_back(std::move(r));
  }

  for (std::size_t head = 0; head < elems.size(); ++head) {
    for (const Raw& g : gens) {
      Raw prod;
      prod.perm.resize(vertex_count);
      prod.sign.resize(vertex_count);
      prod.chi = elems[head].chi * g.chi;
      const Raw& h = elems[head];
      for (int v = 0; v < vertex_count; ++v) {
        prod.perm[v] = g.perm[h.perm[v]];
        prod.sign[v] = static_cast<std::int8_t>(h.sign[v] * g.sign[h.perm[v]]);
      }
      for (int v = 0; v < vertex_count; ++v) {
        if (is_branch_[v]) prod.sign[v] = 1;
      }
      auto it = seen.find(key_of(prod));
      if (it == seen.end()) {
        seen.emplace(key_of(prod), static_cast<int>(elems.size()));
        elems.push_back(std::move(prod));
        if (elems.size() > 240) {
          throw std::runtime_error("lifted group closure unexpectedly large");
        }
      } else if (elems[it->second].chi != prod.chi) {
        throw std::runtime_error(
            "character inconsistency: generators do not extend to a character");
      }
    }
  }

  elements_.reserve(elems.size());
  for (const Raw& r : elems) {
    Element e;
    e.chi = r.chi;
    e.sign = r.sign;
    e.inverse_perm.resize(vertex_count);
    for (int v = 0; v < vertex_count; ++v) e.inverse_perm[r.perm[v]] = v;
    elements_.push_back(std::move(e));
  }
}

Eigen::VectorXd SectorProjector::apply(const Eigen::VectorXd& full_values) const {
  const int nv = static_cast<int>(full_values.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nv);
  for (const Element& e : elements_) {
    for (int w = 0; w < nv; ++w) {
      const int v = e.inverse_perm[w];
      out[w] += e.chi * e.sign[v] * full_values[v];
    }
  }
  out /= static_cast<double>(elements_.size());
  for (int v = 0; v < nv; ++v) {
    if (is_branch_[v]) out[v] = 0.0;
  }
  return out;
}

namespace {

struct BlockEigResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
  double residual = 0.0;
  int iterations = 0;
};

// Blocked inverse iteration with M-orthonormalization and Rayleigh-Ritz
// extraction on the pencil (K, diag(m)). `project` (optional) restricts
// the iteration to an invariant subspace.
BlockEigResult block_smallest(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& m,
                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& project,
                              int count, double tol, int max_iterations, unsigned seed) {
  const int n = static_cast<int>(m.size());
  const int block = std::min(n, std::max(count + 2, 4));
  const double shift = 1e-3;

  Eigen::SparseMatrix<double> A = K;
  Eigen::VectorXd mvec = m;
  A.reserve(Eigen::VectorXi::Constant(n, 1));
  for (int i = 0; i < n; ++i) A.coeffRef(i, i) += shift * mvec[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(A);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("factorization of shifted stiffness failed");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_column = [&]() {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = unit(rng);
    if (project) x = project(x);
    return x;
  };

  Eigen::MatrixXd X(n, block);
  for (int c = 0; c < block; ++c) X.col(c) = random_column();

  auto m_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.dot(mvec.cwiseProduct(b));
  };
  // Modified Gram-Schmidt in the M inner product, two passes per column
  // (inverse iteration drives the block toward near dependence);
  // degenerate columns are replaced from the deterministic random stream.
  auto orthonormalize = [&](Eigen::MatrixXd& Y) {
    for (int c = 0; c < Y.cols(); ++c) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        const double before = std::sqrt(m_dot(Y.col(c), Y.col(c)));
        for (int pass = 0; pass < 2; ++pass) {
          for (int k = 0; k < c; ++k) {
            Y.col(c) -= m_dot(Y.col(k), Y.col(c)) * Y.col(k);
          }
        }
        const double nrm = std::sqrt(m_dot(Y.col(c), Y.col(c)));
        if (nrm > 1e-13 * std::max(1.0, before)) {
          Y.col(c) /= nrm;
          break;
        }
        if (attempt == 63) throw std::runtime_error("empty iteration subspace (rank 0)");
        Y.col(c) = random_column();
      }
    }
  };

  orthonormalize(X);
  BlockEigResult res;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    Eigen::MatrixXd Y(n, block);
    for (int c = 0; c < block; ++c) {
      Eigen::VectorXd y = ldlt.solve(mvec.cwiseProduct(X.col(c)));
      if (project) y = project(y);
      Y.col(c) = y;
    }
    orthonormalize(Y);
    Eigen::MatrixXd small = Y.transpose() * (K * Y).eval();
    small = 0.5 * (small + small.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    X = Y * es.eigenvectors();
    res.eigenvalues = es.eigenvalues();
    res.iterations = iter;

    double worst = 0.0;
    for (int c = 0; c < count; ++c) {
      const Eigen::VectorXd r = K * X.col(c) - res.eigenvalues[c] * mvec.cwiseProduct(X.col(c));
      const double rn = std::sqrt(r.cwiseQuotient(mvec).dot(r));
      worst = std::max(worst, rn);
    }
    res.residual = worst;
    if (worst < tol) break;
  }
  if (res.residual >= tol) {
    throw std::runtime_error("eigensolver did not converge within the iteration cap");
  }
  res.vectors = X;
  return res;
}

}  // namespace

EigenResult solve_lowest(const TwistedOperators& ops, const SectorProjector* projector,
                         const SolveOptions& options) {
  if (options.tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
  const int nfree = static_cast<int>(ops.free_vertices.size());
  const int nv = static_cast<int>(ops.mass.size());

  // Reduce to the free (non-branch) vertex set.
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < ops.stiffness.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(ops.stiffness, k); it; ++it) {
      const int i = ops.full_to_free[it.row()];
      const int j = ops.full_to_free[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  }
  Eigen::SparseMatrix<double> K(nfree, nfree);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd m(nfree);
  for (int i = 0; i < nfree; ++i) m[i] = ops.mass[ops.free_vertices[i]];

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> project;
  if (projector != nullptr) {
    project = [&](const Eigen::VectorXd& x) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(nv);
      for (int i = 0; i < nfree; ++i) full[ops.free_vertices[i]] = x[i];
      full = projector->apply(full);
      Eigen::VectorXd out(nfree);
      for (int i = 0; i < nfree; ++i) out[i] = full[ops.free_vertices[i]];
      return out;
    };
  }

  const BlockEigResult blk = block_smallest(K, m, project, options.count, options.tol,
                                            options.max_iterations, options.seed);

  EigenResult result;
  result.eigenvalue = blk.eigenvalues[0];
  result.residual = blk.residual;
  result.iterations = blk.iterations;
  for (int c = 0; c < options.count && c < blk.eigenvalues.size(); ++c) {
    result.extra_eigenvalues.push_back(blk.eigenvalues[c]);
  }

  Eigen::VectorXd x = blk.vectors.col(0);
  // Deterministic overall sign.
  const double mx = x.cwiseAbs().maxCoeff();
  for (int i = 0; i < nfree; ++i) {
    if (std::abs(x[i]) > 0.5 * mx) {
      if (x[i] < 0) x = -x;
      break;
    }
  }
  result.section.values = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < nfree; ++i) result.section.values[ops.free_vertices[i]] = x[i];
  return result;
}

double annulus_inequality_check(const SphereMesh& mesh, const MeshTables& tables,
                                const SignCocycle& cocycle, int branch_index, double delta,
                                double rho, std::optional<int> filter_below_mode) {
  const int nb = static_cast<int>(mesh.branch_vertices.size());
  if (branch_index < 0 || branch_index >= nb) throw std::invalid_argument("branch index");
  double min_sep = M_PI;
  for (int a = 0; a < nb; ++a) {
    for (int b = a + 1; b < nb; ++b) {
      const Vec3& pa = mesh.vertices[mesh.branch_vertices[a]];
      const Vec3& pb = mesh.vertices[mesh.branch_vertices[b]];
      min_sep = std::min(min_sep, std::acos(std::clamp(pa.dot(pb), -1.0, 1.0)));
    }
  }
  if (!(0.0 <= delta && delta < rho && rho < min_sep / 4.0 + 1e-12)) {
    throw std::invalid_argument("annulus radii must satisfy 0 <= delta < rho < separation/4");
  }
  if (link_holonomy(cocycle, mesh, tables, mesh.branch_vertices[branch_index]) != -1) {
    throw std::invalid_argument("annulus inequality requires the twisted cocycle");
  }

  const auto& dist = tables.branch_distance[branch_index];
  std::vector<char> is_branch(mesh.vertex_count(), 0);
  for (int v : mesh.branch_vertices) is_branch[v] = 1;
  std::vector<int> dof;  // annulus-interior vertices
  std::vector<int> full_to_dof(mesh.vertex_count(), -1);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (is_branch[v]) {
      if (v != mesh.branch_vertices[branch_index] && dist[v] < rho) {
        throw std::invalid_argument("annulus contains another branch point");
      }
      continue;
    }
    if (dist[v] > delta && dist[v] < rho) {
      full_to_dof[v] = static_cast<int>(dof.size());
      dof.push_back(v);
    }
  }
  if (dof.size() < 8) throw std::invalid_argument("annulus too thin for this mesh");

  // Stiffness restricted to sections supported on the annulus.
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < tables.edge_count(); ++e) {
    const auto [i, j] = tables.edges[e];
    const double w = tables.cotan_weight[e];
    const int di = full_to_dof[i], dj = full_to_dof[j];
    if (di >= 0) trip.emplace_back(di, di, w);
    if (dj >= 0) trip.emplace_back(dj, dj, w);
    if (di >= 0 && dj >= 0) {
      const double off = -w * cocycle.edge_sign[e];
      trip.emplace_back(di, dj, off);
      trip.emplace_back(dj, di, off);
    }
  }
  const int n = static_cast<int>(dof.size());
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd m(n);
  for (int i = 0; i < n; ++i) m[i] = tables.vertex_area[dof[i]];

  if (filter_below_mode && *filter_below_mode > 0) {
    const int nmode = *filter_below_mode;
    const double h = tables.mean_edge_length;
    const double r_lo = delta + 0.5 * h;
    const double r_hi = rho - 0.5 * h;
    if (r_hi <= r_lo) throw std::invalid_argument("annulus too thin for mode filtering");
    // Dense ladder of sampling circles; radii below the local sampling
    // gate are skipped, but the usable ladder must reach close to the
    // inner boundary so low modes cannot hide near it.
    std::vector<CircleSampling> circles;
    const int n_circles = std::max(4, static_cast<int>(std::ceil((r_hi - r_lo) / (0.75 * h))) + 1);
    double first_usable = -1.0;
    for (int s = 0; s < n_circles; ++s) {
      const double r = r_lo + (r_hi - r_lo) * s / (n_circles - 1);
      try {
        circles.push_back(sample_circle(mesh, tables, cocycle, branch_index, r, 8 * (nmode + 1)));
      } catch (const std::invalid_argument&) {
        continue;
      }
      if (first_usable < 0.0) first_usable = r;
    }
    if (circles.size() < 3 || first_usable > delta + 2.5 * h) {
      throw std::invalid_argument("annulus too coarse for mode filtering at this level");
    }
    std::vector<Eigen::VectorXd> rows;
    for (const CircleSampling& circle : circles) {
      for (int mode = 0; mode < nmode; ++mode) {
        Eigen::VectorXd re = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd im = Eigen::VectorXd::Zero(n);
        const double nu = mode + 0.5;
        for (std::size_t k = 0; k < circle.samples.size(); ++k) {
          const auto& smp = circle.samples[k];
          const double cw = std::cos(nu * smp.theta);
          const double sw = std::sin(nu * smp.theta);
          for (int c = 0; c < 3; ++c) {
            const int d = full_to_dof[smp.vertices[c]];
            if (d < 0) continue;  // supported sections vanish there
            re[d] += cw * smp.transported_weight[c];
            im[d] -= sw * smp.transported_weight[c];
          }
        }
        rows.push_back(std::move(re));
        rows.push_back(std::move(im));
      }
    }
    // Null-space reduction and a dense generalized eigensolve: the
    // constraint projector does not commute with K, and the annulus
    // problems are small.
    Eigen::MatrixXd C(static_cast<int>(rows.size()), n);
    for (int r = 0; r < C.rows(); ++r) C.row(r) = rows[r].transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(C.transpose());
    const Eigen::MatrixXd Q = qr.householderQ();
    // Effective rank of C^T.
    int rank = 0;
    const Eigen::MatrixXd R = qr.matrixQR().topRows(C.rows()).triangularView<Eigen::Upper>();
    const double rthresh = 1e-12 * R.cwiseAbs().maxCoeff();
    for (int i = 0; i < std::min<int>(C.rows(), n); ++i) {
      if (std::abs(R(i, i)) > rthresh) ++rank;
    }
    const Eigen::MatrixXd Z = Q.rightCols(n - rank);
    const Eigen::MatrixXd Kz = Z.transpose() * Eigen::MatrixXd(K) * Z;
    const Eigen::MatrixXd Mz = Z.transpose() * m.asDiagonal() * Z;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        0.5 * (Kz + Kz.transpose()), 0.5 * (Mz + Mz.transpose()));
    if (ges.info() != Eigen::Success) throw std::runtime_error("constrained eigensolve failed");
    return 1.0 / ges.eigenvalues()[0];
  }

  const BlockEigResult blk = block_smallest(K, m, nullptr, 1, 1e-9, 5000, 7);
  return 1.0 / blk.eigenvalues[0];
}

double moebius_circle_lowest_eigenvalue(int n) {
  if (n < 8) throw std::invalid_argument("need at least 8 points");
  const double h = 2.0 * M_PI / n;
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const double sign = (j == 0) ? -1.0 : 1.0;  // Moebius wrap
    trip.emplace_back(i, i, 1.0 / (h * h));
    trip.emplace_back(j, j, 1.0 / (h * h));
    trip.emplace_back(i, j, -sign / (h * h));
    trip.emplace_back(j, i, -sign / (h * h));
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  const Eigen::VectorXd m = Eigen::VectorXd::Ones(n);
  // ||K|| ~ 1/h^2 puts the floating-point residual floor near 1e-9.
  const BlockEigResult blk = block_smallest(K, m, nullptr, 1, 1e-7, 5000, 3);
  return blk.eigenvalues[0];
}

std::string operators_to_coordinate_text(const TwistedOperators& ops) {
  std::ostringstream os;
  os.precision(17);
  os << "# twisted stiffness (row col value), full vertex indexing; lumped mass follows\n";
  for (int k = 0; k < ops.stiffness.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(ops.stiffness, k); it; ++it) {
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
    }
  }
  os << "# mass (vertex value)\n";
  for (int i = 0; i < ops.mass.size(); ++i) {
    os << i << " " << ops.mass[i] << "\n";
  }
  return os.str();
}

}  // namespace z2lab
