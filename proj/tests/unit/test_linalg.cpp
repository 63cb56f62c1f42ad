#include "fourspace/linalg.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fourspace::linalg;

namespace {

const TolerancePolicy kPolicy{};

Matrix unit(Eigen::Index d, Eigen::Index i) {
    Matrix m = Matrix::Zero(d, 1);
    m(i, 0) = 1.0;
    return m;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
    return m;
}

// 2x2 singular values by the direct formula, as an independent check.
std::pair<double, double> svals_2x2(const Eigen::Matrix2d& a) {
    const double t = a.squaredNorm();
    const double d = std::abs(a.determinant());
    const double s = std::sqrt(std::max(0.0, t * t - 4 * d * d));
    return {std::sqrt((t + s) / 2), std::sqrt(std::max(0.0, (t - s) / 2))};
}

}  // namespace

TEST_CASE("orthonormalize collapses duplicates") {
    Matrix m(2, 2);
    m << 1, 1, 0, 0;
    const Matrix q = orthonormalize(m, kPolicy);
    REQUIRE(q.cols() == 1);
    CHECK(std::abs(std::abs(q(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(q(1, 0)) < 1e-14);
}

TEST_CASE("orthonormalize keeps independent pairs and the Gram identity") {
    Matrix m(3, 2);
    m << 1, 1, 0, 1, 0, 0;
    const Matrix q = orthonormalize(m, kPolicy);
    REQUIRE(q.cols() == 2);
    CHECK((q.adjoint() * q - Matrix::Identity(2, 2)).norm() < kPolicy.residual_tol);
}

TEST_CASE("orthonormalize drops a near-dependent vector per rank_tol") {
    // Second singular value verified by the direct 2x2 formula.
    Eigen::Matrix2d a;
    const double eps = 1e-10;
    a << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0 + 2 * eps + eps * eps),
        1 / std::sqrt(2.0), (1 + eps) / std::sqrt(2.0 + 2 * eps + eps * eps);
    const auto [s1, s2] = svals_2x2(a);
    TolerancePolicy policy;
    policy.rank_tol = 1e-8;
    REQUIRE(s2 < policy.rank_tol * s1);
    const Matrix q = orthonormalize(a.cast<Complex>(), policy);
    CHECK(q.cols() == 1);
}

TEST_CASE("numeric rank basics") {
    CHECK(numeric_rank(Matrix::Identity(3, 3), kPolicy) == 3);
    CHECK(numeric_rank(Matrix::Zero(4, 2), kPolicy) == 0);
    const Matrix u = random_matrix(5, 1, 7);
    const Matrix v = random_matrix(1, 6, 8);
    CHECK(numeric_rank(u * v, kPolicy) == 1);
}

TEST_CASE("numeric rank info reports the governing singular values") {
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = 2.0;
    m(1, 1) = 1e-14;
    const auto info = numeric_rank_info(m, kPolicy);
    CHECK(info.rank == 1);
    CHECK(info.largest_sv == doctest::Approx(2.0));
    CHECK(info.smallest_kept == doctest::Approx(2.0));
    CHECK(info.largest_dropped == doctest::Approx(1e-14));
}

TEST_CASE("nullspace dimensions and contents") {
    CHECK(nullspace(Matrix::Zero(2, 2), kPolicy).cols() == 2);
    CHECK(nullspace(Matrix::Identity(3, 3), kPolicy).cols() == 0);
    Matrix row(1, 2);
    row << 1, 1;
    const Matrix k = nullspace(row, kPolicy);
    REQUIRE(k.cols() == 1);
    // span{(1,-1)/sqrt(2)}
    CHECK(std::abs(k(0, 0) + k(1, 0)) < 1e-14);
    CHECK(std::abs(k.norm() - 1.0) < 1e-14);
}

TEST_CASE("rank-nullity across random matrices") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Eigen::Index rows = 3 + seed % 4;
        const Eigen::Index cols = 2 + seed % 5;
        const Matrix m = random_matrix(rows, cols, seed) *
                         (seed % 2 ? Matrix::Identity(cols, cols)
                                   : random_matrix(cols, cols, seed + 100));
        CHECK(numeric_rank(m, kPolicy) + nullspace(m, kPolicy).cols() == cols);
    }
}

TEST_CASE("principal angles on lines") {
    const Matrix e1 = unit(2, 0);
    const Matrix e2 = unit(2, 1);
    Matrix diag(2, 1);
    diag << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);

    auto a_11 = principal_angles(e1, e1);
    REQUIRE(a_11.size() == 1);
    CHECK(a_11[0] < 1e-12);

    auto a_12 = principal_angles(e1, e2);
    REQUIRE(a_12.size() == 1);
    CHECK(a_12[0] == doctest::Approx(M_PI / 2));

    auto a_1d = principal_angles(e1, diag);
    REQUIRE(a_1d.size() == 1);
    CHECK(a_1d[0] == doctest::Approx(M_PI / 4));
}

TEST_CASE("principal angles: symmetry, basis invariance, zero-angle count") {
    const Matrix u = orthonormalize(random_matrix(6, 3, 21), kPolicy);
    const Matrix v = orthonormalize(random_matrix(6, 2, 22), kPolicy);
    const auto a_uv = principal_angles(u, v);
    const auto a_vu = principal_angles(v, u);
    REQUIRE(a_uv.size() == a_vu.size());
    for (std::size_t i = 0; i < a_uv.size(); ++i)
        CHECK(a_uv[i] == doctest::Approx(a_vu[i]).epsilon(1e-8));

    // change of basis within the span
    const Matrix mix = orthonormalize(u * random_matrix(3, 3, 23), kPolicy);
    const auto a_mixed = principal_angles(mix, v);
    for (std::size_t i = 0; i < a_uv.size(); ++i)
        CHECK(std::abs(a_mixed[i] - a_uv[i]) < kPolicy.angle_tol);

    // a shared direction forces one zero angle
    Matrix shared(6, 2);
    shared.col(0) = u.col(0);
    shared.col(1) = unit(6, 5).col(0);
    const Matrix w = orthonormalize(shared, kPolicy);
    const auto a_shared = principal_angles(u, w);
    CHECK(a_shared.front() < 1e-12);
}

TEST_CASE("small principal angles are resolved well below angle_tol") {
    const double tiny = 1e-9;
    Matrix u = unit(3, 0);
    Matrix v(3, 1);
    v << std::cos(tiny), std::sin(tiny), 0;
    const auto angles = principal_angles(u, v);
    REQUIRE(angles.size() == 1);
    CHECK(angles[0] == doctest::Approx(tiny).epsilon(1e-6));
}

TEST_CASE("empty subspaces give empty angle lists") {
    CHECK(principal_angles(Matrix(4, 0), Matrix::Identity(4, 2)).empty());
    CHECK(principal_angles(Matrix::Identity(4, 2), Matrix(4, 0)).empty());
}

TEST_CASE("max cosine upper bound certifies transversality") {
    const Matrix e1 = unit(2, 0);
    const Matrix e2 = unit(2, 1);
    CHECK(max_cosine_upper_bound(e1, e2) == 0.0);
    Matrix diag(2, 1);
    diag << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    CHECK(max_cosine_upper_bound(e1, diag) == doctest::Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("tolerance policy validation") {
    TolerancePolicy bad;
    bad.rank_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.rank_tol = 2.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
