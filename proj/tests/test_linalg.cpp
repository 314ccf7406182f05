#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <fstream>
#include <random>

#include "hsbm/linalg.hpp"
#include "hsbm/similarity.hpp"

using namespace hsbm;

namespace {

Eigen::MatrixXd random_symmetric(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

void expect_valid_decomposition(const Eigen::MatrixXd& m, const EigenDecomposition& e) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    EXPECT_LE((m * e.vectors.col(i) - e.values(i) * e.vectors.col(i)).norm(), 1e-8 * (1 + std::abs(e.values(i))));
    if (i > 0) {
      EXPECT_GE(e.values(i - 1), e.values(i));
    }
  }
  const Eigen::MatrixXd gram = e.vectors.transpose() * e.vectors;
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-10);
  (void)n;
}

// Reference PSD projection from the full decomposition.
Eigen::MatrixXd psd_reference(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

TEST(EigSymmetric, Identity) {
  const auto e = eig_symmetric(Eigen::MatrixXd::Identity(5, 5));
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(e.values(i), 1.0, 1e-15);
  expect_valid_decomposition(Eigen::MatrixXd::Identity(5, 5), e);
}

TEST(EigSymmetric, DiagonalGivesSignedBasis) {
  Eigen::MatrixXd m = Eigen::Vector3d(3, 1, -2).asDiagonal();
  const auto e = eig_symmetric(m);
  EXPECT_NEAR(e.values(0), 3, 1e-15);
  EXPECT_NEAR(e.values(1), 1, 1e-15);
  EXPECT_NEAR(e.values(2), -2, 1e-15);
  EXPECT_LE((e.vectors - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EigSymmetric, RandomReconstruction) {
  const auto m = random_symmetric(50, 3);
  const auto e = eig_symmetric(m);
  const Eigen::MatrixXd r = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  EXPECT_LE((r - m).norm() / m.norm(), 1e-9);
  expect_valid_decomposition(m, e);
}

TEST(EigSymmetric, CanonicalSigns) {
  const auto m = random_symmetric(30, 8);
  const auto e = eig_symmetric(m);
  for (Eigen::Index j = 0; j < 30; ++j) {
    Eigen::Index arg;
    e.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(e.vectors(arg, j), 0.0);
  }
  const auto again = eig_symmetric(m);
  EXPECT_EQ(e.vectors, again.vectors);
}

TEST(EigSymmetric, RejectsAsymmetric) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(0, 1) = 1e-6;
  EXPECT_THROW(eig_symmetric(m), ParameterError);
  EXPECT_THROW(eig_symmetric(Eigen::MatrixXd::Zero(2, 3)), ParameterError);
}

TEST(PartialEigensolver, EigenvaluesMatchReference) {
  for (Eigen::Index n : {1, 2, 5, 40, 150}) {
    const auto m = random_symmetric(n, static_cast<unsigned>(n));
    PartialEigensolver ps(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(ps.eigenvalues_ascending()[i], ref.eigenvalues()(i), 1e-11);
    EXPECT_NEAR(ps.spectral_norm(), ref.eigenvalues().cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(PartialEigensolver, TopPairsAreValid) {
  const auto m = random_symmetric(120, 4);
  const auto top = PartialEigensolver(m).top(5);
  ASSERT_EQ(top.values.size(), 5);
  expect_valid_decomposition(m, top);
  const auto full = eig_symmetric(m);
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_NEAR(top.values(i), full.values(i), 1e-10);
    EXPECT_LE((top.vectors.col(i) - full.vectors.col(i)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(PartialEigensolver, RepeatedEigenvalues) {
  // Materialized expected similarity: two simple eigenvalues and one of multiplicity n - 2.
  const auto es = expected_similarity({3, 60, 20, 4, 0}, sample_balanced_assignment(60, 5));
  const Eigen::MatrixXd m = es.materialize();
  PartialEigensolver ps(m);
  std::vector<std::size_t> all(60);
  for (std::size_t i = 0; i < 60; ++i) all[i] = i;
  const Eigen::MatrixXd v = ps.eigenvectors(all);
  const auto& ev = ps.eigenvalues_ascending();
  for (Eigen::Index i = 0; i < 60; ++i)
    EXPECT_LE((m * v.col(i) - ev[static_cast<std::size_t>(i)] * v.col(i)).norm(), 1e-8 * (1 + std::abs(ev[static_cast<std::size_t>(i)])));
  EXPECT_LE((v.transpose() * v - Eigen::MatrixXd::Identity(60, 60)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TridiagonalEigenvalues, NearlyDiagonalNullBlock) {
  // Captured from a PSD projection step: one large eigenvalue and hundreds of roundoff-sized entries.
  std::ifstream in(HSBM_TEST_DATA "/stiff_tridiagonal.txt");
  ASSERT_TRUE(in);
  std::vector<double> diag, sub;
  for (double a, b; in >> a >> b;) {
    diag.push_back(a);
    sub.push_back(b);
  }
  ASSERT_EQ(diag.size(), 400u);
  const Eigen::Index n = static_cast<Eigen::Index>(diag.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i, i) = diag[static_cast<std::size_t>(i)];
    if (i + 1 < n) t(i, i + 1) = t(i + 1, i) = sub[static_cast<std::size_t>(i)];
  }
  const auto values = detail::tridiagonal_eigenvalues(diag, sub);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(t, Eigen::EigenvaluesOnly);
  for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(values[static_cast<std::size_t>(i)], ref.eigenvalues()(i), 1e-11);
}

TEST(ProjectPsd, MatchesFullProjection) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto m = random_symmetric(80, seed);
    const auto p = project_psd(m);
    EXPECT_LE((p.matrix - psd_reference(m)).cwiseAbs().maxCoeff(), 1e-10);
  }
  // Low-rank positive side takes the partial path.
  Eigen::MatrixXd low = -Eigen::MatrixXd::Identity(100, 100);
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(100, -1, 2);
  low += u * u.transpose();
  const auto p = project_psd(low);
  EXPECT_EQ(p.rank, 1u);
  EXPECT_LE((p.matrix - psd_reference(low)).cwiseAbs().maxCoeff(), 1e-10);
  // Mostly positive spectrum takes the complement path.
  const auto q = project_psd(-low);
  EXPECT_EQ(q.rank, 99u);
  EXPECT_LE((q.matrix - psd_reference(-low)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ProjectPsd, FixesPsdInput) {
  Eigen::MatrixXd a = random_symmetric(30, 9);
  const Eigen::MatrixXd psd = a * a.transpose();
  EXPECT_LE((project_psd(psd).matrix - psd).cwiseAbs().maxCoeff(), 1e-10 * psd.norm());
}

TEST(SpectralNorm, LargestMagnitude) {
  Eigen::MatrixXd m = Eigen::Vector3d(1, -5, 2).asDiagonal();
  EXPECT_NEAR(spectral_norm(m), 5.0, 1e-14);
  EXPECT_EQ(spectral_norm(Eigen::MatrixXd::Zero(4, 4)), 0.0);
}
