#include "fourspace/subspace.hpp"

#include <stdexcept>

namespace fourspace::subspaces {

namespace {

void require_same_ambient(const Subspace& u, const Subspace& v) {
    if (u.ambient_dim() != v.ambient_dim())
        throw std::invalid_argument("subspaces: ambient dimensions differ");
}

}  // namespace

Subspace Subspace::zero(Eigen::Index ambient) {
    return Subspace(ambient, Matrix(ambient, 0));
}

Subspace Subspace::full(Eigen::Index ambient) {
    return Subspace(ambient, Matrix::Identity(ambient, ambient));
}

Subspace Subspace::from_span(const Matrix& vectors, const TolerancePolicy& policy) {
    return Subspace(vectors.rows(), linalg::orthonormalize(vectors, policy));
}

Subspace Subspace::from_orthonormal(Matrix basis, const TolerancePolicy& policy) {
    const Eigen::Index r = basis.cols();
    double residual = 0.0;
    if (r <= 512) {
        const Matrix gram = basis.adjoint() * basis;
        residual = (gram - Matrix::Identity(r, r)).norm();
    } else {
        // Full Gram is quadratic in the basis size; spot-check column norms
        // and a deterministic stride of off-diagonal pairs.
        for (Eigen::Index i = 0; i < r; ++i)
            residual = std::max(residual, std::abs(basis.col(i).norm() - 1.0));
        const Eigen::Index stride = std::max<Eigen::Index>(1, r / 64);
        for (Eigen::Index i = 0; i < r; i += stride)
            for (Eigen::Index j = i + 1; j < r; j += stride)
                residual = std::max(residual, std::abs(basis.col(i).dot(basis.col(j))));
    }
    if (residual > policy.residual_tol * std::max<double>(1.0, std::sqrt(double(r))))
        throw std::invalid_argument("Subspace::from_orthonormal: basis not orthonormal, residual " +
                                    std::to_string(residual));
    const Eigen::Index rows = basis.rows();
    return Subspace(rows, std::move(basis));
}

AddingMapInfo adding_map_info(const Subspace& u, const Subspace& v, const TolerancePolicy& policy) {
    require_same_ambient(u, v);
    AddingMapInfo info;
    if (u.dim() == 0 || v.dim() == 0) {
        info.intersection = Subspace::zero(u.ambient_dim());
        info.dim_sum = u.dim() + v.dim();
        return info;
    }
    Matrix stacked(u.ambient_dim(), u.dim() + v.dim());
    stacked << u.basis(), v.basis();
    // Kernel vectors (a; b) give B_u a = -B_v b, i.e. elements of the
    // intersection; the map (a, b) -> B_u a is injective on the kernel.
    const Matrix kernel = linalg::nullspace(stacked, policy);
    const auto rank_info = linalg::numeric_rank_info(stacked, policy);
    info.dim_sum = rank_info.rank;
    info.min_singular_value = rank_info.smallest_kept;
    info.max_dropped_singular_value = rank_info.largest_dropped;
    if (kernel.cols() == 0) {
        info.intersection = Subspace::zero(u.ambient_dim());
    } else {
        const Matrix vectors = u.basis() * kernel.topRows(u.dim());
        info.intersection = Subspace::from_span(vectors, policy);
    }
    return info;
}

Subspace intersect(const Subspace& u, const Subspace& v, const TolerancePolicy& policy) {
    return adding_map_info(u, v, policy).intersection;
}

Subspace sum(const Subspace& u, const Subspace& v, const TolerancePolicy& policy) {
    require_same_ambient(u, v);
    Matrix stacked(u.ambient_dim(), u.dim() + v.dim());
    stacked << u.basis(), v.basis();
    return Subspace::from_span(stacked, policy);
}

Subspace complement(const Subspace& u) {
    const Eigen::Index d = u.ambient_dim();
    const Eigen::Index r = u.dim();
    if (r == 0) return Subspace::full(d);
    if (r == d) return Subspace::zero(d);
    if (u.basis().imag().isZero(0.0)) {
        Eigen::HouseholderQR<linalg::RealMatrix> qr(u.basis().real());
        linalg::RealMatrix q = qr.householderQ();
        TolerancePolicy policy;
        return Subspace::from_orthonormal(q.rightCols(d - r).cast<linalg::Complex>(), policy);
    }
    Eigen::HouseholderQR<Matrix> qr(u.basis());
    Matrix q = qr.householderQ();
    TolerancePolicy policy;
    return Subspace::from_orthonormal(q.rightCols(d - r), policy);
}

bool contains(const Subspace& u, const Subspace& v, const TolerancePolicy& policy) {
    require_same_ambient(u, v);
    if (v.dim() == 0) return true;
    if (v.dim() > u.dim()) return false;
    const auto angles = principal_angles(u, v);
    return angles.back() <= policy.angle_tol;
}

bool equal(const Subspace& u, const Subspace& v, const TolerancePolicy& policy) {
    return u.dim() == v.dim() && contains(u, v, policy) && contains(v, u, policy);
}

long fredholm_index(const Subspace& u, const Subspace& v, const TolerancePolicy& policy) {
    const AddingMapInfo info = adding_map_info(u, v, policy);
    const Eigen::Index dim_complement = u.ambient_dim() - info.dim_sum;
    return static_cast<long>(info.intersection.dim()) - static_cast<long>(dim_complement);
}

std::vector<double> principal_angles(const Subspace& u, const Subspace& v) {
    require_same_ambient(u, v);
    return linalg::principal_angles(u.basis(), v.basis());
}

}  // namespace fourspace::subspaces
