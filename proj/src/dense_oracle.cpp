#include "tcsim/dense_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "tcsim/errors.hpp"

namespace tcsim {

namespace {

using Eigen::MatrixXd;

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Single two-level operators in the basis {|g>, |e>}.
MatrixXd sigma_z_half() {
  MatrixXd m = MatrixXd::Zero(2, 2);
  m(0, 0) = -0.5;
  m(1, 1) = 0.5;
  return m;
}

MatrixXd sigma_plus() {
  MatrixXd m = MatrixXd::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

// Embed a single-molecule operator at site `site` among `n` molecules.
MatrixXd on_site(const MatrixXd& op, int site, int n) {
  MatrixXd out = MatrixXd::Identity(1, 1);
  for (int k = 0; k < n; ++k) {
    out = kron(out, k == site ? op : MatrixXd::Identity(2, 2));
  }
  return out;
}

}  // namespace

const OracleSector* DenseOracleResult::find(HalfInt r, HalfInt c) const {
  for (const auto& s : sectors) {
    if (s.r == r && s.c == c) return &s;
  }
  return nullptr;
}

DenseOracleResult dense_oracle(int molecules, int photon_cutoff, double kappa) {
  if (molecules < 1 || molecules > kDenseOracleMaxMolecules) {
    throw DomainError("dense oracle supports 1..3 molecules");
  }
  if (photon_cutoff < 0) throw DomainError("photon cutoff must be >= 0");
  const std::size_t spin_dim = std::size_t{1} << molecules;
  const std::size_t fock_dim = static_cast<std::size_t>(photon_cutoff) + 1;
  if (spin_dim * fock_dim > kDenseOracleMaxDim) {
    throw DomainError("dense oracle dimension " + std::to_string(spin_dim * fock_dim) +
                      " exceeds " + std::to_string(kDenseOracleMaxDim));
  }

  const auto sd = static_cast<Eigen::Index>(spin_dim);
  const auto fd = static_cast<Eigen::Index>(fock_dim);
  MatrixXd r3 = MatrixXd::Zero(sd, sd);
  MatrixXd rp = MatrixXd::Zero(sd, sd);
  for (int k = 0; k < molecules; ++k) {
    r3 += on_site(sigma_z_half(), k, molecules);
    rp += on_site(sigma_plus(), k, molecules);
  }
  const MatrixXd rm = rp.transpose();
  const MatrixXd r_squared = r3 * r3 + 0.5 * (rp * rm + rm * rp);

  MatrixXd a = MatrixXd::Zero(fd, fd);
  for (Eigen::Index n = 1; n < fd; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const MatrixXd ad = a.transpose();
  const MatrixXd id_f = MatrixXd::Identity(fd, fd);
  const MatrixXd id_s = MatrixXd::Identity(sd, sd);

  const MatrixXd h = kron(id_f, r3) + kron(ad * a, id_s) - kappa * kron(a, rp) -
                     kappa * kron(ad, rm);
  const MatrixXd casimir = kron(id_f, r_squared);

  DenseOracleResult result;
  result.molecules = molecules;
  result.photon_cutoff = photon_cutoff;
  result.kappa = kappa;
  result.full_dim = spin_dim * fock_dim;

  // Product basis index = n * spin_dim + bits; twice c = 2n + (2*popcount - N).
  std::map<std::int64_t, std::vector<Eigen::Index>> by_twice_c;
  for (std::size_t n = 0; n < fock_dim; ++n) {
    for (std::size_t bits = 0; bits < spin_dim; ++bits) {
      const int excited = __builtin_popcountll(bits);
      const std::int64_t twice_c = 2 * static_cast<std::int64_t>(n) + 2 * excited - molecules;
      by_twice_c[twice_c].push_back(static_cast<Eigen::Index>(n * spin_dim + bits));
    }
  }

  for (const auto& [twice_c, idx] : by_twice_c) {
    // The sector reaches n = c + N/2; it is exact only if that fits under the cutoff.
    if (twice_c + molecules > 2 * photon_cutoff) continue;
    const auto dim = static_cast<Eigen::Index>(idx.size());
    MatrixXd hs(dim, dim), cs(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        hs(i, j) = h(idx[i], idx[j]);
        cs(i, j) = casimir(idx[i], idx[j]);
      }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> cas(cs);
    // Group Casimir eigenvectors by r from r(r+1).
    std::map<std::int64_t, std::vector<Eigen::Index>> by_twice_r;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double x = cas.eigenvalues()(k);
      const double r = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * std::max(0.0, x)));
      by_twice_r[std::llround(2.0 * r)].push_back(k);
    }
    for (const auto& [twice_r, cols] : by_twice_r) {
      MatrixXd q(dim, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) {
        q.col(static_cast<Eigen::Index>(k)) = cas.eigenvectors().col(cols[k]);
      }
      const MatrixXd projected = q.transpose() * hs * q;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (projected + projected.transpose()),
                                                 Eigen::EigenvaluesOnly);
      OracleSector sector;
      sector.r = HalfInt::from_twice(twice_r);
      sector.c = HalfInt::from_twice(twice_c);
      sector.eigenvalues.assign(es.eigenvalues().data(),
                                es.eigenvalues().data() + es.eigenvalues().size());
      std::sort(sector.eigenvalues.begin(), sector.eigenvalues.end());
      // Block size min(2r+1, c+r+1) divides the sector size.
      const std::int64_t block_dim =
          std::min<std::int64_t>(twice_r + 1, (twice_c + twice_r) / 2 + 1);
      sector.multiplicity = cols.size() / static_cast<std::size_t>(block_dim);
      result.sectors.push_back(std::move(sector));
    }
  }
  return result;
}

}  // namespace tcsim
