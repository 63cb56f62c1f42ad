#include "fourspace/endo.hpp"

#include <doctest.h>

#include <random>

using namespace fourspace;
using namespace fourspace::endo;
using linalg::Complex;
using linalg::Matrix;
using systems::FourSystem;

namespace {

const linalg::TolerancePolicy kPolicy{};

Matrix jordan_block(Eigen::Index n) {
    Matrix j = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) j(i, i + 1) = 1.0;
    return j;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
    return m;
}

// Brute-force decomposability oracle: exact checks on coordinate splittings
// plus a deterministic coefficient grid over the endomorphism basis with
// spectral splitting.  Independent of the randomized search path.
bool oracle_decomposable(const FourSystem& s, const linalg::TolerancePolicy& policy) {
    const Eigen::Index d = s.ambient;
    // (i) coordinate splittings
    if (d <= 12) {
        for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << d); ++mask) {
            Matrix p = Matrix::Zero(d, d);
            for (Eigen::Index i = 0; i < d; ++i)
                if (mask & (std::uint64_t{1} << i)) p(i, i) = 1.0;
            bool invariant = true;
            for (const auto& sub : s.spaces) {
                const Matrix b = sub.basis();
                const Matrix q = Matrix::Identity(d, d) - b * b.adjoint();
                // both P and I-P must respect every subspace for a splitting
                if ((q * (p * b)).norm() > 1e-8 || (q * ((Matrix::Identity(d, d) - p) * b)).norm() > 1e-8) {
                    invariant = false;
                    break;
                }
            }
            if (invariant) return true;
        }
    }
    // (ii) coefficient grid over End with spectral splitting
    const EndoAlgebra alg = compute_endomorphisms(s, policy);
    const Eigen::Index m = alg.dim();
    if (m <= 1) return false;
    std::vector<Eigen::VectorXd> grid;
    if (m <= 5) {
        // all {-1,0,1}^m coefficient vectors
        Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
        std::function<void(Eigen::Index)> rec = [&](Eigen::Index k) {
            if (k == m) {
                grid.push_back(c);
                return;
            }
            for (int v = -1; v <= 1; ++v) {
                c(k) = v;
                rec(k + 1);
            }
        };
        rec(0);
    } else {
        std::mt19937_64 rng(999);
        std::normal_distribution<double> gauss;
        for (int t = 0; t < 200; ++t) {
            Eigen::VectorXd c(m);
            for (Eigen::Index i = 0; i < m; ++i) c(i) = gauss(rng);
            grid.push_back(c);
        }
    }
    for (const auto& c : grid) {
        if (c.norm() == 0) continue;
        Matrix v = Matrix::Zero(d, d);
        for (Eigen::Index k = 0; k < m; ++k) v += c(k) * alg.basis()[static_cast<std::size_t>(k)];
        Eigen::ComplexEigenSolver<Matrix> es(v);
        if (es.info() != Eigen::Success) continue;
        // exact check: does some eigenvalue cluster give a nontrivial
        // idempotent inside End?
        std::vector<Complex> evs(es.eigenvalues().data(), es.eigenvalues().data() + d);
        std::sort(evs.begin(), evs.end(), [](Complex a, Complex b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        double best_gap = 0.0;
        for (std::size_t i = 0; i + 1 < evs.size(); ++i)
            best_gap = std::max(best_gap, std::abs(evs[i + 1] - evs[i]));
        if (best_gap < 1e-4) continue;
        // defer to an eigen-projection attempt via the library's search with
        // this element alone (by treating {v} closure): reuse spectral
        // splitting through find_nontrivial_idempotent on a single-element
        // draw is not possible, so project directly:
        Eigen::PartialPivLU<Matrix> lu(es.eigenvectors());
        const double recon =
            (es.eigenvectors() * es.eigenvalues().asDiagonal() *
                 lu.solve(Matrix::Identity(d, d)) -
             v).norm();
        if (recon > 1e-8 * std::max(1.0, v.norm())) continue;
        // split at the median of the real parts of the two extremes
        const double mid = 0.5 * (evs.front().real() + evs.back().real());
        Eigen::VectorXcd indicator = Eigen::VectorXcd::Zero(d);
        int count = 0;
        for (Eigen::Index i = 0; i < d; ++i)
            if (es.eigenvalues()(i).real() < mid) {
                indicator(i) = 1.0;
                ++count;
            }
        if (count == 0 || count == d) continue;
        Matrix p = es.eigenvectors() * indicator.asDiagonal() * lu.solve(Matrix::Identity(d, d));
        for (int it = 0; it < 3; ++it) {
            const Matrix p2 = p * p;
            p = 3.0 * p2 - 2.0 * (p2 * p);
        }
        if ((p * p - p).norm() > 1e-8) continue;
        if (p.norm() < 0.5 || (p - Matrix::Identity(d, d)).norm() < 0.5) continue;
        if (alg.project(p).second > 1e-7 * std::max(1.0, p.norm())) continue;
        return true;
    }
    return false;
}

}  // namespace

TEST_CASE("End of the trivial system is the full matrix algebra; scalars for lines") {
    std::array<subspaces::Subspace, 4> all_full{
        subspaces::Subspace::full(1), subspaces::Subspace::full(1), subspaces::Subspace::full(1),
        subspaces::Subspace::full(1)};
    const FourSystem trivial(1, std::move(all_full));
    const auto alg = compute_endomorphisms(trivial, kPolicy);
    CHECK(alg.dim() == 1);
    CHECK(is_transitive(trivial, kPolicy));
}

TEST_CASE("dim End(S_{J_n}) = n, brute-force cross-check for n = 2, 3") {
    for (Eigen::Index n : {2, 3}) {
        const FourSystem s = systems::operator_system(jordan_block(n), kPolicy);
        const auto alg = compute_endomorphisms(s, kPolicy);
        CHECK(alg.dim() == n);
        CHECK(alg.identity_residual() < 1e-10);
        CHECK(alg.closure_residual() < 1e-8);
        // every basis element commutes with the doubled Jordan block action
        const auto [commutes, exhaustive] = alg.commutative(1e-8);
        CHECK(commutes);
        CHECK(exhaustive);
    }
}

TEST_CASE("dim End(S_diag(1,2)) = 2 with a rank-2 idempotent witness") {
    Matrix d12 = Matrix::Zero(2, 2);
    d12(0, 0) = 1.0;
    d12(1, 1) = 2.0;
    const FourSystem s = systems::operator_system(d12, kPolicy);
    const auto alg = compute_endomorphisms(s, kPolicy);
    CHECK(alg.dim() == 2);

    const auto result = is_indecomposable(s, kPolicy);
    CHECK(result.verdict == Verdict::decomposable);
    CHECK(result.proven);  // commutative upgrade
    REQUIRE(result.witness.has_value());
    const Matrix& p = *result.witness;
    CHECK((p * p - p).norm() < 1e-9);
    CHECK(result.witness_rank == 2);
    // witness respects every subspace
    for (const auto& sub : s.spaces) {
        const Matrix b = sub.basis();
        const Matrix q = Matrix::Identity(4, 4) - b * b.adjoint();
        CHECK((q * (p * b)).norm() < 1e-8);
    }
}

TEST_CASE("Jordan systems are proven indecomposable via the commutative upgrade") {
    for (Eigen::Index n : {2, 3}) {
        const FourSystem s = systems::operator_system(jordan_block(n), kPolicy);
        const auto result = is_indecomposable(s, kPolicy);
        CHECK(result.verdict == Verdict::proven_indecomposable);
        CHECK(result.proven);
        CHECK_FALSE(is_transitive(s, kPolicy));  // dim End = n > 1
    }
}

TEST_CASE("idempotent search on scalars finds nothing; J_3 finds nothing in 64 attempts") {
    std::array<subspaces::Subspace, 4> all_full{
        subspaces::Subspace::full(1), subspaces::Subspace::full(1), subspaces::Subspace::full(1),
        subspaces::Subspace::full(1)};
    const auto scalars = compute_endomorphisms(FourSystem(1, std::move(all_full)), kPolicy);
    CHECK_FALSE(find_nontrivial_idempotent(scalars, 64, 0, kPolicy).witness.has_value());

    const FourSystem j3 = systems::operator_system(jordan_block(3), kPolicy);
    const auto alg = compute_endomorphisms(j3, kPolicy);
    const auto search = find_nontrivial_idempotent(alg, 64, 0, kPolicy);
    CHECK_FALSE(search.witness.has_value());
    CHECK(search.attempts_used == 64);
}

TEST_CASE("direct sum of two Jordan systems is decomposable") {
    const FourSystem s = systems::operator_system(jordan_block(2), kPolicy);
    const FourSystem ss = systems::direct_sum(s, s);
    const auto result = is_indecomposable(ss, kPolicy);
    CHECK(result.verdict == Verdict::decomposable);
    CHECK_FALSE(is_transitive(ss, kPolicy));
}

TEST_CASE("random corpus: verdicts agree with the brute-force oracle") {
    std::mt19937_64 rng(2024);
    int decomposable_seen = 0, indecomposable_seen = 0;
    for (int t = 0; t < 25; ++t) {
        FourSystem s = [&] {
            switch (t % 4) {
                case 0:
                    return systems::operator_system(random_matrix(2, 2, rng), kPolicy);
                case 1:
                    return systems::operator_system(jordan_block(2 + t % 2), kPolicy);
                case 2:
                    return systems::operator_system(random_matrix(1 + t % 2, 2, rng),
                                                    random_matrix(2, 1 + t % 2, rng), kPolicy);
                default: {
                    const auto a = systems::operator_system(random_matrix(2, 2, rng), kPolicy);
                    const auto b = systems::operator_system(jordan_block(2), kPolicy);
                    return systems::direct_sum(a, b);
                }
            }
        }();
        REQUIRE(s.ambient <= 8);
        const auto verdict = is_indecomposable(s, kPolicy);
        const bool oracle = oracle_decomposable(s, kPolicy);
        INFO("instance ", t, " ambient ", s.ambient, " dim_end ", verdict.dim_end);
        CHECK(verdict.decomposable() == oracle);
        (verdict.decomposable() ? decomposable_seen : indecomposable_seen)++;
    }
    CHECK(decomposable_seen > 0);
    CHECK(indecomposable_seen > 0);
}

TEST_CASE("transitivity implies indecomposability on the corpus") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 10; ++t) {
        const FourSystem s = systems::operator_system(random_matrix(2, 2, rng), kPolicy);
        if (is_transitive(s, kPolicy))
            CHECK(is_indecomposable(s, kPolicy).verdict != Verdict::decomposable);
    }
}

TEST_CASE("invariance residuals of computed endomorphism bases") {
    std::mt19937_64 rng(88);
    const FourSystem s = systems::operator_system(random_matrix(3, 3, rng), kPolicy);
    const auto alg = compute_endomorphisms(s, kPolicy);
    for (const auto& v : alg.basis())
        for (const auto& sub : s.spaces) {
            const Matrix b = sub.basis();
            const Matrix q = Matrix::Identity(s.ambient, s.ambient) - b * b.adjoint();
            CHECK((q * (v * b)).norm() < kPolicy.residual_tol * 10);
        }
}

TEST_CASE("ambient cap yields a clear error") {
    std::array<subspaces::Subspace, 4> big{
        subspaces::Subspace::full(40), subspaces::Subspace::full(40), subspaces::Subspace::full(40),
        subspaces::Subspace::full(40)};
    const FourSystem s(40, std::move(big));
    CHECK_THROWS_AS(compute_endomorphisms(s, kPolicy), std::invalid_argument);
}

TEST_CASE("triangular idempotent lemma regression") {
    const auto report = triangular_idempotent_check(200, 12, 1, kPolicy);
    CHECK(report.trials == 200);
    CHECK(report.nontrivial_idempotents == 0);
    CHECK(report.nilpotency_collapse_ok);
    CHECK(report.worst_forced_residual > 1e-6);  // random P never close to idempotent
}

TEST_CASE("verdict JSON record") {
    Matrix d12 = Matrix::Zero(2, 2);
    d12(0, 0) = 1.0;
    d12(1, 1) = 2.0;
    const auto result = is_indecomposable(systems::operator_system(d12, kPolicy), kPolicy);
    const auto j = verdict_to_json(result);
    CHECK(j["dim_end"] == 2);
    CHECK(j["verdict"] == "decomposable");
    CHECK(j["witness_rank"] == 2);
}
