#include "foliated/clifford.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace foliated {

namespace {

using Mat = Eigen::MatrixXi;

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat sigma_z() { return (Mat(2, 2) << 1, 0, 0, -1).finished(); }
Mat sigma_x() { return (Mat(2, 2) << 0, 1, 1, 0).finished(); }
Mat epsilon() { return (Mat(2, 2) << 0, -1, 1, 0).finished(); }

// r antisymmetric, pairwise anticommuting matrices squaring to -Id.
std::vector<Mat> complex_structures(int r) {
  if (r == 0) return {};
  if (r == 1) return {epsilon()};
  const Mat id2 = Mat::Identity(2, 2);
  std::vector<Mat> three = {kron(epsilon(), id2), kron(sigma_z(), epsilon()),
                            kron(sigma_x(), epsilon())};
  if (r <= 3) return {three.begin(), three.begin() + r};
  if (r == 4) {
    std::vector<Mat> four = {kron(epsilon(), Mat::Identity(4, 4))};
    for (const auto& c : three) four.push_back(kron(sigma_z(), c));
    return four;
  }
  fail(ErrorKind::InvalidArgument, "no complex-structure table for r = " + std::to_string(r));
}

}  // namespace

int clifford_minimal_dimension(int q) {
  switch (q) {
    case 1: return 2;
    case 2: return 4;
    case 3: return 8;
    case 4: return 8;
    case 5: return 16;
    default:
      fail(ErrorKind::InvalidArgument,
           "unsupported Clifford rank q = " + std::to_string(q) + " (table covers 1..5)");
  }
}

CliffordSystem build_clifford_system(int q, int copies) {
  const int base = clifford_minimal_dimension(q);
  require(copies >= 1, ErrorKind::InvalidArgument, "copies must be at least 1");
  const auto js = complex_structures(q - 1);
  const int d = base / 2;
  const Mat id = Mat::Identity(d, d);

  std::vector<Mat> irreducible = {kron(sigma_z(), id), kron(sigma_x(), id)};
  for (const auto& j : js) {
    const auto reps = d / j.rows();
    irreducible.push_back(kron(epsilon(), kron(Mat::Identity(reps, reps), j)));
  }

  CliffordSystem s;
  s.q = q;
  s.copies = copies;
  s.n = copies * base;
  const Mat blocks = Mat::Identity(copies, copies);
  for (const auto& p : irreducible) s.matrices.push_back(kron(blocks, p));
  return s;
}

int anticommutation_defect(const CliffordSystem& system) {
  const Mat id = Mat::Identity(system.n, system.n);
  int defect = 0;
  const auto& p = system.matrices;
  for (std::size_t i = 0; i < p.size(); ++i) {
    defect = std::max(defect, (p[i] - p[i].transpose()).cwiseAbs().maxCoeff());
    for (std::size_t j = i; j < p.size(); ++j) {
      Mat r = p[i] * p[j] + p[j] * p[i];
      if (i == j) r -= 2 * id;
      defect = std::max(defect, r.cwiseAbs().maxCoeff());
    }
  }
  return defect;
}

Eigen::MatrixXd trace_gram(const CliffordSystem& system) {
  const auto k = static_cast<Eigen::Index>(system.matrices.size());
  Eigen::MatrixXd g(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      g(i, j) = static_cast<double>((system.matrices[i] * system.matrices[j]).trace()) / system.n;
  return g;
}

Eigen::VectorXd pi_rho(const CliffordSystem& system, const Eigen::VectorXd& x) {
  require(x.size() == system.n, ErrorKind::DimensionMismatch, "point has wrong ambient dimension");
  require(std::abs(x.norm() - 1.0) <= 1e-12, ErrorKind::InvalidArgument, "pi_rho needs a unit vector");
  Eigen::VectorXd out(system.matrices.size());
  for (std::size_t i = 0; i < system.matrices.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = x.dot(system.matrices[i].cast<double>() * x);
  return out;
}

double fkm_value(const CliffordSystem& system, const Eigen::VectorXd& x) {
  return 1.0 - 2.0 * pi_rho(system, x).squaredNorm();
}

double fkm_coordinate(double f) { return 0.25 * std::acos(std::clamp(f, -1.0, 1.0)); }

std::pair<int, int> fkm_multiplicities(const CliffordSystem& system) {
  return {system.q, system.n / 2 - system.q - 1};
}

bool is_degenerate(const CliffordSystem& system) { return fkm_multiplicities(system).second < 0; }

WeightedDomain fkm_quotient_domain(const CliffordSystem& system, int bins, std::int64_t samples,
                                   std::uint64_t seed) {
  require(anticommutation_defect(system) == 0, ErrorKind::InvalidArgument,
          "matrices do not form a Clifford system");
  const auto [m1, m2] = fkm_multiplicities(system);
  require(m2 >= 0, ErrorKind::Degenerate,
          "f o pi_rho is constant for q = " + std::to_string(system.q) +
              ", n = " + std::to_string(system.n));

  // Signed permutation form: row i of P_k has its single nonzero in column perm[k][i].
  std::vector<std::vector<int>> perm(system.matrices.size(), std::vector<int>(system.n));
  std::vector<std::vector<int>> sign = perm;
  for (std::size_t k = 0; k < system.matrices.size(); ++k)
    for (int i = 0; i < system.n; ++i)
      for (int j = 0; j < system.n; ++j)
        if (system.matrices[k](i, j) != 0) {
          perm[k][i] = j;
          sign[k][i] = system.matrices[k](i, j);
        }
  const QuotientMap map = [perm, sign](const Eigen::VectorXd& x) {
    double norm2 = 0.0;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      double c = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) c += sign[k][i] * x(i) * x(perm[k][i]);
      norm2 += c * c;
    }
    return fkm_coordinate(1.0 - 2.0 * norm2);
  };

  DomainMeta meta;
  meta.name = "fkm(" + std::to_string(system.q) + "," + std::to_string(system.copies) + ")";
  meta.ambient_dim = system.n - 1;
  meta.kappa = std::min(system.n - 2 - m1, system.n - 2 - m2);
  meta.left = m1 > 0 ? EndpointKind::SingularLeaf : EndpointKind::Regular;
  meta.right = m2 > 0 ? EndpointKind::SingularLeaf : EndpointKind::Regular;

  PushforwardOptions options;
  options.bins = bins;
  options.samples = samples;
  options.seed = seed;
  return pushforward_mc(uniform_sphere_sampler(system.n), map, 0.0, std::numbers::pi / 4.0,
                        sphere_volume(system.n - 1), meta, options);
}

}  // namespace foliated
