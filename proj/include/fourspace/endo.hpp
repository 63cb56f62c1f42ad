#pragma once

// End(S) for finite-dimensional four-subspace systems, idempotent hunting
// and (in)decomposability verdicts.  The endomorphism space is the kernel of
// the stacked invariance constraints (I - P_i) V B_i = 0; idempotents are
// hunted through spectral projections of random algebra elements, which stay
// inside the algebra because they are polynomials in the element.

#include "fourspace/system.hpp"

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

namespace fourspace::endo {

using linalg::Matrix;
using linalg::TolerancePolicy;
using systems::FourSystem;

class EndoAlgebra {
public:
    EndoAlgebra(Eigen::Index ambient, std::vector<Matrix> basis, const TolerancePolicy& policy);

    Eigen::Index ambient_dim() const { return ambient_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
    const std::vector<Matrix>& basis() const { return basis_; }

    /// Least-squares coefficients of m over the basis and the residual norm.
    std::pair<Eigen::VectorXcd, double> project(const Matrix& m) const;

    double identity_residual() const { return identity_residual_; }
    double closure_residual() const { return closure_residual_; }

    /// All basis pairs commute to the given tolerance.  Exhaustive for
    /// dim <= exhaustive_cap, otherwise sampled (second return flag false).
    std::pair<bool, bool> commutative(double tol, Eigen::Index exhaustive_cap = 24) const;

private:
    Eigen::Index ambient_ = 0;
    std::vector<Matrix> basis_;
    Matrix vec_basis_;  // d^2 x dim, for span projections
    double identity_residual_ = 0.0;
    double closure_residual_ = 0.0;
};

/// Kernel of the stacked invariance constraints; dense route, guarded to
/// moderate ambient dimensions (use the block-recurrence route in the exotic
/// module for large truncations).
EndoAlgebra compute_endomorphisms(const FourSystem& s, const TolerancePolicy& policy);

struct IdempotentSearch {
    std::optional<Matrix> witness;
    int attempts_used = 0;
    int skipped = 0;  // numerically defective draws
};

/// Randomized spectral-projection search for V in the span with V^2 = V,
/// V not in {0, I}.  "None found" is evidence, not proof.
IdempotentSearch find_nontrivial_idempotent(const EndoAlgebra& alg, int attempts,
                                            std::uint64_t seed, const TolerancePolicy& policy);

enum class Verdict { decomposable, no_idempotent_found, proven_indecomposable };

struct DecompositionResult {
    Verdict verdict = Verdict::no_idempotent_found;
    Eigen::Index dim_end = 0;
    std::optional<Matrix> witness;
    Eigen::Index witness_rank = 0;  // splitting ranges: rank(P) and ambient - rank(P)
    bool proven = false;            // commutative-case exact upgrade
    int attempts = 0;
    std::uint64_t seed = 0;

    bool decomposable() const { return verdict == Verdict::decomposable; }
};

DecompositionResult is_indecomposable(const FourSystem& s, const TolerancePolicy& policy,
                                      int attempts = 64, std::uint64_t seed = 0);

/// End(S) = C I.
bool is_transitive(const FourSystem& s, const TolerancePolicy& policy);

nlohmann::ordered_json verdict_to_json(const DecompositionResult& r);

struct TriangularIdempotentReport {
    int trials = 0;
    int nontrivial_idempotents = 0;  // must stay 0
    bool nilpotency_collapse_ok = true;
    double worst_forced_residual = 0.0;  // min over trials of ||P^2 - P|| for nontrivial P
};

/// Regression for the scalar-plus-strictly-triangular idempotent lemma:
/// random P = lambda I + N (N strictly upper triangular) is never idempotent
/// unless trivial, and the squaring cascade N -> N^2 collapses to exact zero.
TriangularIdempotentReport triangular_idempotent_check(int trials, Eigen::Index max_dim,
                                                       std::uint64_t seed,
                                                       const TolerancePolicy& policy);

}  // namespace fourspace::endo
