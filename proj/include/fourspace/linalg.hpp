#pragma once

// Shared dense kernels: orthonormalization, numeric rank, nullspace and
// principal angles, all driven by one TolerancePolicy so every downstream
// dimension count is reproducible from config.  Scalars are complex; inputs
// with exactly zero imaginary part are routed through real arithmetic.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace fourspace::linalg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

struct TolerancePolicy {
    double rank_tol = 1e-10;      // relative singular-value threshold
    double angle_tol = 1e-6;      // radians: "zero angle" threshold
    double residual_tol = 1e-10;  // norm threshold for equation residuals

    void validate() const {
        if (!(rank_tol > 0.0 && rank_tol < 1.0) || !(angle_tol > 0.0) || !(residual_tol > 0.0))
            throw std::invalid_argument("TolerancePolicy: tolerances must be positive, rank_tol < 1");
    }
};

struct RankInfo {
    Eigen::Index rank = 0;
    double largest_sv = 0.0;
    double smallest_kept = 0.0;    // smallest singular value counted into the rank
    double largest_dropped = 0.0;  // largest singular value below the threshold
};

/// Orthonormal basis of the column span, near-dependent columns dropped per
/// rank_tol.  Deterministic given input order; empty input gives a d x 0
/// result.
Matrix orthonormalize(const Matrix& columns, const TolerancePolicy& policy);

Eigen::Index numeric_rank(const Matrix& m, const TolerancePolicy& policy);
RankInfo numeric_rank_info(const Matrix& m, const TolerancePolicy& policy);

/// Orthonormal basis of the kernel; dimension = cols - numeric_rank.
Matrix nullspace(const Matrix& m, const TolerancePolicy& policy);

/// Principal angles between the spans of two orthonormal bases, nondecreasing
/// in [0, pi/2]; min(dim U, dim V) entries.  Small angles are recomputed from
/// the residual sine for accuracy.
std::vector<double> principal_angles(const Matrix& u, const Matrix& v);

/// Upper bound on the largest principal-angle cosine between two orthonormal
/// bases via the Hoelder bound ||U^H V||_2 <= sqrt(||.||_1 ||.||_inf).
/// A value < 1 certifies trivial intersection without an SVD.
double max_cosine_upper_bound(const Matrix& u, const Matrix& v);

/// Thin-SVD singular values (descending).
Eigen::VectorXd singular_values(const Matrix& m);

}  // namespace fourspace::linalg
