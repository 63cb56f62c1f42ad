#pragma once

// Subspace arithmetic in a finite-dimensional ambient space.  Intersections
// go through the kernel of the adding operator (x, y) -> x + y, which also
// yields the Fredholm index data.

#include "fourspace/linalg.hpp"

#include <vector>

namespace fourspace::subspaces {

using linalg::Matrix;
using linalg::TolerancePolicy;

/// A subspace stored as an orthonormal spanning set (ambient x dim).
class Subspace {
public:
    Subspace() = default;

    static Subspace zero(Eigen::Index ambient);
    static Subspace full(Eigen::Index ambient);
    /// Orthonormalizes the given spanning vectors (columns).
    static Subspace from_span(const Matrix& vectors, const TolerancePolicy& policy);
    /// Adopts an already orthonormal basis; validates the Gram residual.
    static Subspace from_orthonormal(Matrix basis, const TolerancePolicy& policy);

    Eigen::Index ambient_dim() const { return ambient_; }
    Eigen::Index dim() const { return basis_.cols(); }
    const Matrix& basis() const { return basis_; }

private:
    Subspace(Eigen::Index ambient, Matrix basis) : ambient_(ambient), basis_(std::move(basis)) {}
    Eigen::Index ambient_ = 0;
    Matrix basis_;
};

struct AddingMapInfo {
    Subspace intersection;
    Eigen::Index dim_sum = 0;
    double min_singular_value = 0.0;  // smallest singular value kept in the rank
    double max_dropped_singular_value = 0.0;
};

/// Kernel analysis of the adding operator E_i + E_j -> H; returns the
/// intersection together with the singular values governing the rank call.
AddingMapInfo adding_map_info(const Subspace& u, const Subspace& v, const TolerancePolicy& policy);

Subspace intersect(const Subspace& u, const Subspace& v, const TolerancePolicy& policy);
Subspace sum(const Subspace& u, const Subspace& v, const TolerancePolicy& policy);
Subspace complement(const Subspace& u);

/// True iff v is contained in u (principal angles of v against u all within
/// angle_tol).
bool contains(const Subspace& u, const Subspace& v, const TolerancePolicy& policy);
bool equal(const Subspace& u, const Subspace& v, const TolerancePolicy& policy);

/// dim(U cap V) - dim((U + V)^perp).
long fredholm_index(const Subspace& u, const Subspace& v, const TolerancePolicy& policy);

std::vector<double> principal_angles(const Subspace& u, const Subspace& v);

}  // namespace fourspace::subspaces
