#include "fourspace/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fourspace::linalg {

namespace {

bool all_real(const Matrix& m) { return m.imag().isZero(0.0); }

// BDCSVD below ~16 columns falls back to Jacobi internally; one entry point.
template <typename Mat>
Eigen::BDCSVD<Mat> thin_svd(const Mat& m) {
    return Eigen::BDCSVD<Mat>(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

RankInfo rank_from_svals(const Eigen::VectorXd& sv, const TolerancePolicy& policy) {
    RankInfo info;
    if (sv.size() == 0) return info;
    info.largest_sv = sv(0);
    const double threshold = policy.rank_tol * info.largest_sv;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) {
            info.rank = i + 1;
            info.smallest_kept = sv(i);
        } else {
            info.largest_dropped = sv(i);
            break;
        }
    }
    return info;
}

template <typename Mat>
Mat orthonormalize_impl(const Mat& columns, const TolerancePolicy& policy) {
    if (columns.cols() == 0 || columns.isZero(0.0))
        return Mat(columns.rows(), 0);
    auto svd = thin_svd(columns);
    const RankInfo info = rank_from_svals(svd.singularValues(), policy);
    return svd.matrixU().leftCols(info.rank);
}

template <typename Mat>
Mat nullspace_impl(const Mat& m, const TolerancePolicy& policy) {
    if (m.cols() == 0) return Mat(0, 0);
    if (m.rows() == 0 || m.isZero(0.0))
        return Mat::Identity(m.cols(), m.cols());
    Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeFullV);
    const RankInfo info = rank_from_svals(svd.singularValues(), policy);
    return svd.matrixV().rightCols(m.cols() - info.rank);
}

template <typename Mat>
std::vector<double> principal_angles_impl(const Mat& u, const Mat& v) {
    const Eigen::Index count = std::min(u.cols(), v.cols());
    if (count == 0) return {};
    const Mat w = u.adjoint() * v;
    auto svd = thin_svd(w);
    std::vector<double> angles(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) {
        const double sigma = std::min(1.0, svd.singularValues()(i));
        if (sigma * sigma > 0.5) {
            // cosine is ill-conditioned near 0 angle; use the residual sine
            Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1> q =
                v * svd.matrixV().col(i);
            q -= u * (u.adjoint() * q).eval();
            angles[static_cast<std::size_t>(i)] = std::asin(std::min(1.0, q.norm()));
        } else {
            angles[static_cast<std::size_t>(i)] = std::acos(sigma);
        }
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

}  // namespace

Matrix orthonormalize(const Matrix& columns, const TolerancePolicy& policy) {
    policy.validate();
    if (all_real(columns)) {
        RealMatrix r = orthonormalize_impl<RealMatrix>(columns.real(), policy);
        return r.cast<Complex>();
    }
    return orthonormalize_impl<Matrix>(columns, policy);
}

RankInfo numeric_rank_info(const Matrix& m, const TolerancePolicy& policy) {
    policy.validate();
    if (m.rows() == 0 || m.cols() == 0) return {};
    Eigen::VectorXd sv;
    if (all_real(m))
        sv = Eigen::BDCSVD<RealMatrix>(m.real()).singularValues();
    else
        sv = Eigen::BDCSVD<Matrix>(m).singularValues();
    return rank_from_svals(sv, policy);
}

Eigen::Index numeric_rank(const Matrix& m, const TolerancePolicy& policy) {
    return numeric_rank_info(m, policy).rank;
}

Matrix nullspace(const Matrix& m, const TolerancePolicy& policy) {
    policy.validate();
    if (all_real(m)) return nullspace_impl<RealMatrix>(m.real(), policy).cast<Complex>();
    return nullspace_impl<Matrix>(m, policy);
}

std::vector<double> principal_angles(const Matrix& u, const Matrix& v) {
    if (u.rows() != v.rows())
        throw std::invalid_argument("principal_angles: ambient dimensions differ");
    if (all_real(u) && all_real(v))
        return principal_angles_impl<RealMatrix>(u.real(), v.real());
    return principal_angles_impl<Matrix>(u, v);
}

double max_cosine_upper_bound(const Matrix& u, const Matrix& v) {
    if (u.cols() == 0 || v.cols() == 0) return 0.0;
    const Matrix w = u.adjoint() * v;
    const double norm1 = w.cwiseAbs().colwise().sum().maxCoeff();
    const double norminf = w.cwiseAbs().rowwise().sum().maxCoeff();
    return std::sqrt(norm1 * norminf);
}

Eigen::VectorXd singular_values(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return Eigen::VectorXd();
    if (all_real(m)) return Eigen::BDCSVD<RealMatrix>(m.real()).singularValues();
    return Eigen::BDCSVD<Matrix>(m).singularValues();
}

}  // namespace fourspace::linalg
