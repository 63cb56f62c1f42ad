#include "fourspace/exotic.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace fourspace::exotic {

double ExoticSpec::w(int i, std::int64_t k) const {
    if (i < 1 || i > n_blocks)
        throw std::invalid_argument("ExoticSpec::w: weighted blocks are i = 1.." +
                                    std::to_string(n_blocks));
    return family.w(i, k);
}

ExoticSpec make_spec(int n_blocks, Eigen::Index truncation, const TolerancePolicy& policy,
                     double tail_eps) {
    if (n_blocks < 1) throw std::invalid_argument("make_spec: N must be >= 1");
    if (truncation < n_blocks + 2)
        throw std::invalid_argument("make_spec: truncation must be >= N + 2");
    if (!(tail_eps > 0)) throw std::invalid_argument("make_spec: tail_eps must be positive");
    policy.validate();
    // Cover 4M so the spurious-solution filter can run at M, 2M, 4M.
    weights::WeightFamily family(weights::build_breakpoints_covering(4 * truncation));
    return ExoticSpec{n_blocks, truncation, std::move(family), policy, tail_eps};
}

LazyVector LazyVector::fixed_point(WeightFn w, std::shared_ptr<const LazyVector> b, double c) {
    LazyVector out;
    out.w_ = std::move(w);
    if (b && !b->zero()) out.b_ = std::move(b);
    out.c_ = c;
    // q(t) = |c| + t p(t) bounds |u(n+1)| <= q(n) (3/4)^n, one degree above b.
    out.coeffs_.push_back(std::abs(c));
    if (out.b_)
        out.coeffs_.insert(out.coeffs_.end(), out.b_->coeffs_.begin(), out.b_->coeffs_.end());
    return out;
}

LazyVector solve_fixed_point(LazyVector::WeightFn w, std::shared_ptr<const LazyVector> b, double c) {
    return LazyVector::fixed_point(std::move(w), std::move(b), c);
}

double LazyVector::entry(std::int64_t n) const {
    if (n < 1) throw std::out_of_range("LazyVector::entry: n must be >= 1");
    if (zero()) return 0.0;
    if (memo_.empty()) memo_.push_back(c_);
    while (static_cast<std::int64_t>(memo_.size()) < n) {
        const std::int64_t m = static_cast<std::int64_t>(memo_.size());  // computing entry m+1
        const double bm = b_ ? b_->entry(m) : 0.0;
        memo_.push_back((memo_.back() - bm) / w_(m));
    }
    return memo_[static_cast<std::size_t>(n - 1)];
}

double LazyVector::envelope(std::int64_t n) const {
    if (zero()) return 0.0;
    double q = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) q = q * static_cast<double>(n) + *it;
    return q * std::pow(0.75, static_cast<double>(n));
}

double LazyVector::tail_mass_bound(std::int64_t beyond) const {
    if (zero()) return 0.0;
    // sum_{m > beyond} entry(m)^2 <= sum_{n >= beyond} q(n)^2 (9/16)^n.
    double total = 0.0;
    double term = 0.0;
    std::int64_t n = beyond;
    for (; n < beyond + 20000; ++n) {
        const double e = envelope(n);
        term = e * e;
        if (!(term > 1e-300)) return total;
        total += term;
    }
    // Geometric remainder: the term ratio is below (9/16)(1 + 1/n)^(2 deg),
    // safely under 0.95 once n is this large.
    return total + term * 19.0;
}

Eigen::VectorXd LazyVector::prefix(Eigen::Index len) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(len);
    if (!zero())
        for (Eigen::Index i = 0; i < len; ++i) out(i) = entry(i + 1);
    return out;
}

Eigen::VectorXd backward_shift_apply(const LazyVector::WeightFn& w, const Eigen::VectorXd& x) {
    const Eigen::Index len = x.size() > 0 ? x.size() - 1 : 0;
    Eigen::VectorXd out(len);
    for (Eigen::Index n = 0; n < len; ++n) out(n) = w(n + 1) * x(n + 1);
    return out;
}

Eigen::VectorXcd backward_shift_apply(const LazyVector::WeightFn& w, const Eigen::VectorXcd& x) {
    const Eigen::Index len = x.size() > 0 ? x.size() - 1 : 0;
    Eigen::VectorXcd out(len);
    for (Eigen::Index n = 0; n < len; ++n) out(n) = w(n + 1) * x(n + 1);
    return out;
}

Eigen::MatrixXd build_t(const ExoticSpec& spec) {
    const Eigen::Index m = spec.truncation;
    const Eigen::Index k = spec.k_dim();
    const int n_blocks = spec.n_blocks;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int p = 0; p < n_blocks; ++p) {
        // B_{w_{p+1}} corner: superdiagonal weights.
        for (Eigen::Index r = 0; r + 1 < m; ++r)
            t(p * m + r, p * m + r + 1) = spec.w(p + 1, r + 1);
        // Identity superdiagonal block.
        t.block(p * m, (p + 1) * m, m, m).setIdentity();
    }
    // Unilateral shift corner: subdiagonal ones.
    for (Eigen::Index r = 0; r + 1 < m; ++r) t(n_blocks * m + r + 1, n_blocks * m + r) = 1.0;
    return t;
}

Eigen::Index distinguished_index(const ExoticSpec& spec) {
    return static_cast<Eigen::Index>(spec.n_blocks) * spec.truncation;
}

namespace {

// Graph columns [I; T] orthonormalized through the Cholesky factor of the
// Gram matrix I + T^t T, then the distinguished generator appended.
linalg::Matrix orthonormal_e3_basis(const ExoticSpec& spec, const Eigen::MatrixXd& t) {
    const Eigen::Index k = spec.k_dim();
    const Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(k, k) + t.transpose() * t;
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("orthonormal_e3_basis: Cholesky failed");
    const Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd u(2 * k, k);
    // U = [I; T] L^{-T}: solve L^T X = I and L^T Y = T row-wise.
    const Eigen::MatrixXd linv_t =
        l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(k, k));
    u.topRows(k) = linv_t.transpose();
    u.bottomRows(k) = t * linv_t.transpose();

    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * k);
    g(k + distinguished_index(spec)) = 1.0;
    Eigen::VectorXd residual = g - u * (u.transpose() * g);
    residual.normalize();

    Eigen::MatrixXd basis(2 * k, k + 1);
    basis.leftCols(k) = u;
    basis.col(k) = residual;
    return basis.cast<linalg::Complex>();
}

}  // namespace

systems::FourSystem build_system(const ExoticSpec& spec) {
    const Eigen::Index k = spec.k_dim();
    const Eigen::Index d = 2 * k;
    using linalg::Matrix;
    Matrix e1 = Matrix::Zero(d, k);
    e1.topRows(k).setIdentity();
    Matrix e2 = Matrix::Zero(d, k);
    e2.bottomRows(k).setIdentity();
    Matrix e4(d, k);
    e4.topRows(k) = Matrix::Identity(k, k) / std::sqrt(2.0);
    e4.bottomRows(k) = Matrix::Identity(k, k) / std::sqrt(2.0);

    const Eigen::MatrixXd t = build_t(spec);
    const Matrix e3 = orthonormal_e3_basis(spec, t);

    using subspaces::Subspace;
    return systems::FourSystem(
        d, {Subspace::from_orthonormal(std::move(e1), spec.policy),
            Subspace::from_orthonormal(std::move(e2), spec.policy),
            Subspace::from_orthonormal(e3, spec.policy),
            Subspace::from_orthonormal(std::move(e4), spec.policy)});
}

std::vector<Eigen::VectorXd> exact_basis_e1_cap_e3(const ExoticSpec& spec) {
    const Eigen::Index m = spec.truncation;
    const int n_blocks = spec.n_blocks;
    std::vector<Eigen::VectorXd> out;
    for (int j0 = 1; j0 <= n_blocks; ++j0) {
        // x_{j0} = e_1; descending j: B_{w_j} x_j + x_{j+1} = 0.
        std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(n_blocks));
        for (auto& comp : x) comp = Eigen::VectorXd::Zero(m);
        x[static_cast<std::size_t>(j0 - 1)](0) = 1.0;
        for (int j = j0 - 1; j >= 1; --j) {
            const auto& next = x[static_cast<std::size_t>(j)];
            auto& cur = x[static_cast<std::size_t>(j - 1)];
            for (Eigen::Index n = 1; n + 1 <= m; ++n)
                cur(n) = -next(n - 1) / spec.w(j, n);
        }
        Eigen::VectorXd full = Eigen::VectorXd::Zero(spec.ambient());
        for (int j = 1; j <= n_blocks; ++j)
            full.segment((j - 1) * m, m) = x[static_cast<std::size_t>(j - 1)];
        out.push_back(std::move(full));
    }
    return out;
}

Eigen::VectorXd basis_e2_cap_e3(const ExoticSpec& spec) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.ambient());
    v(spec.k_dim() + distinguished_index(spec)) = 1.0;
    return v;
}

Eigen::VectorXd ChainWitness::ambient_vector(const ExoticSpec& spec) const {
    const Eigen::Index m = spec.truncation;
    const Eigen::Index k = spec.k_dim();
    Eigen::VectorXd half = Eigen::VectorXd::Zero(k);
    for (std::size_t j = 0; j < components.size(); ++j)
        half.segment(static_cast<Eigen::Index>(j) * m, m) = components[j].prefix(m);
    Eigen::VectorXd full(2 * k);
    full.head(k) = half;
    full.tail(k) = half;
    return full;
}

std::vector<ChainWitness> exact_basis_e3_cap_e4(const ExoticSpec& spec) {
    const int n_blocks = spec.n_blocks;
    std::vector<ChainWitness> out;
    for (int j0 = 1; j0 <= n_blocks; ++j0) {
        // y = 0 and alpha = 0 are forced in l^2; x_{j0} solves B_w x = x,
        // lower blocks solve B_{w_j} x_j + x_{j+1} = x_j.
        std::vector<std::shared_ptr<const LazyVector>> chain(static_cast<std::size_t>(n_blocks + 1));
        auto weight_fn = [&spec](int j) {
            return LazyVector::WeightFn(
                [&family = spec.family, j](std::int64_t n) { return family.w(j, n); });
        };
        chain[static_cast<std::size_t>(j0)] =
            std::make_shared<LazyVector>(LazyVector::fixed_point(weight_fn(j0), nullptr, 1.0));
        for (int j = j0 - 1; j >= 1; --j)
            chain[static_cast<std::size_t>(j)] = std::make_shared<LazyVector>(
                LazyVector::fixed_point(weight_fn(j), chain[static_cast<std::size_t>(j + 1)], 0.0));
        ChainWitness w;
        w.parameter_index = j0;
        for (int j = 1; j <= n_blocks; ++j) {
            const auto& ptr = chain[static_cast<std::size_t>(j)];
            w.components.push_back(ptr ? *ptr : LazyVector());
        }
        out.push_back(std::move(w));
    }
    return out;
}

DefectLedger defect_exotic(const ExoticSpec& spec) {
    const auto e1e3 = exact_basis_e1_cap_e3(spec);
    const auto e3e4 = exact_basis_e3_cap_e4(spec);
    const Eigen::Index n = static_cast<Eigen::Index>(spec.n_blocks);
    if (static_cast<Eigen::Index>(e1e3.size()) != n || static_cast<Eigen::Index>(e3e4.size()) != n)
        throw std::logic_error("defect_exotic: unexpected witness count");

    DefectLedger ledger;
    ledger.n_blocks = spec.n_blocks;
    // Pairs within {1,2,4} meet in 0 and span H: coordinate structure.
    // E_1+E_3 = H, E_2+E_3 = H and E_3^perp cap E_4^perp = 0 hold for the
    // genuine l^2 system; the nonzero intersection dims carry exact bases.
    ledger.pairs = {LedgerPair{1, 2, 0, 0, "structural"},
                    LedgerPair{1, 3, n, 0, "exact_basis"},
                    LedgerPair{1, 4, 0, 0, "structural"},
                    LedgerPair{2, 3, 1, 0, "exact_basis"},
                    LedgerPair{2, 4, 0, 0, "structural"},
                    LedgerPair{3, 4, n, 0, "exact_basis"}};
    long total = 0;
    for (const auto& p : ledger.pairs)
        total += static_cast<long>(p.dim_intersection) - static_cast<long>(p.dim_sum_complement);
    ledger.defect = Rational(total, 3);
    return ledger;
}

L2Verdict l2_membership_test(const std::vector<Eigen::VectorXd>& candidates, double tail_eps) {
    if (candidates.size() < 3)
        throw std::invalid_argument("l2_membership_test: need at least three truncation levels");
    for (std::size_t i = 0; i + 1 < candidates.size(); ++i)
        if (candidates[i].size() >= candidates[i + 1].size())
            throw std::invalid_argument("l2_membership_test: truncation levels must increase");

    bool cauchy = true;
    bool growing = true;
    for (std::size_t i = 0; i + 1 < candidates.size(); ++i) {
        const auto& a = candidates[i];
        const auto& b = candidates[i + 1];
        Eigen::VectorXd padded = Eigen::VectorXd::Zero(b.size());
        padded.head(a.size()) = a;
        if ((padded - b).norm() > tail_eps) cauchy = false;
        if (b.norm() < 1.2 * a.norm()) growing = false;
    }
    if (cauchy) return L2Verdict::genuine;
    if (growing) return L2Verdict::escaping;
    throw std::runtime_error(
        "l2_membership_test: family neither Cauchy nor norm-escaping at these truncations");
}

namespace {

double e1_e3_witness_residual(const ExoticSpec& spec, const Eigen::MatrixXd& t,
                              const Eigen::VectorXd& v) {
    const Eigen::Index k = spec.k_dim();
    const Eigen::VectorXd x = v.head(k);
    const double second_half = v.tail(k).norm();
    return (t * x).norm() / std::max(1.0, x.norm()) + second_half;
}

double e3_e4_witness_residual(const ExoticSpec& spec, const Eigen::MatrixXd& t,
                              const Eigen::VectorXd& v) {
    const Eigen::Index k = spec.k_dim();
    const Eigen::VectorXd x = v.head(k);
    return (t * x - x).norm() / std::max(1.0, x.norm()) + (v.tail(k) - x).norm();
}

bool envelope_respected(const LazyVector& lv, Eigen::Index m) {
    if (lv.zero()) return true;
    for (Eigen::Index n = 2; n <= m; ++n) {
        const double bound = lv.envelope(n - 1) * (1.0 + 1e-9) + 1e-300;
        if (std::abs(lv.entry(n)) > bound) return false;
    }
    return true;
}

}  // namespace

ExoticCertificate verify_exotic(const ExoticSpec& spec) {
    ExoticCertificate cert;
    cert.n_blocks = spec.n_blocks;
    cert.truncation = spec.truncation;
    cert.ledger = defect_exotic(spec);

    const Eigen::MatrixXd t = build_t(spec);

    cert.e1_e3_witnesses = exact_basis_e1_cap_e3(spec);
    for (const auto& v : cert.e1_e3_witnesses)
        cert.max_witness_residual =
            std::max(cert.max_witness_residual, e1_e3_witness_residual(spec, t, v));

    cert.e2_e3_witness = basis_e2_cap_e3(spec);
    // The distinguished generator itself; membership residual is zero by
    // construction, but fold it through the same check.
    {
        const Eigen::Index k = spec.k_dim();
        const Eigen::VectorXd w = cert.e2_e3_witness.tail(k);
        Eigen::VectorXd alpha_g = Eigen::VectorXd::Zero(k);
        alpha_g(distinguished_index(spec)) = w(distinguished_index(spec));
        cert.max_witness_residual = std::max(
            cert.max_witness_residual, (w - alpha_g).norm() + cert.e2_e3_witness.head(k).norm());
    }

    const auto chains = exact_basis_e3_cap_e4(spec);
    for (const auto& chain : chains) {
        const Eigen::VectorXd v = chain.ambient_vector(spec);
        cert.e3_e4_witnesses.push_back(v);
        cert.max_witness_residual =
            std::max(cert.max_witness_residual, e3_e4_witness_residual(spec, t, v));
        for (const auto& comp : chain.components) {
            if (!envelope_respected(comp, spec.truncation)) cert.envelopes_respected = false;
            cert.max_tail_mass_bound =
                std::max(cert.max_tail_mass_bound, comp.tail_mass_bound(spec.truncation));
        }
    }

    // Linear independence of the emitted bases (leading-entry structure).
    {
        Eigen::MatrixXd w13(spec.ambient(), spec.n_blocks);
        for (int j = 0; j < spec.n_blocks; ++j) w13.col(j) = cert.e1_e3_witnesses[static_cast<std::size_t>(j)];
        Eigen::MatrixXd w34(spec.ambient(), spec.n_blocks);
        for (int j = 0; j < spec.n_blocks; ++j) w34.col(j) = cert.e3_e4_witnesses[static_cast<std::size_t>(j)];
        const auto policy = spec.policy;
        if (linalg::numeric_rank(w13.cast<linalg::Complex>(), policy) != spec.n_blocks)
            cert.failures.push_back("E1 cap E3 witnesses not independent");
        if (linalg::numeric_rank(w34.cast<linalg::Complex>(), policy) != spec.n_blocks)
            cert.failures.push_back("E3 cap E4 witnesses not independent");
    }

    // Zero pairs within {1,2,4}: E_1 perp E_2, and the diagonal meets each
    // coordinate half at cosine exactly 1/sqrt(2); both certify trivial
    // intersection with margin.
    cert.zero_pair_max_cosine = {0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};

    // Diagram from the exact dims.
    {
        systems::IntersectionDiagram d;
        int idx = 0;
        for (const auto& p : cert.ledger.pairs) {
            systems::PairData pd;
            pd.i = p.i;
            pd.j = p.j;
            pd.dim_intersection = p.dim_intersection;
            pd.dim_sum_complement = p.dim_sum_complement;
            if (p.dim_intersection > 0)
                pd.min_principal_angle = 0.0;
            else if (p.i == 1 && p.j == 2)
                pd.min_principal_angle = M_PI / 2.0;
            else
                pd.min_principal_angle = M_PI / 4.0;
            d.pairs[static_cast<std::size_t>(idx++)] = pd;
        }
        cert.diagram = d;
    }
    cert.exotic = systems::exotic_by_diagram(cert.diagram);

    if (cert.max_witness_residual > spec.policy.residual_tol)
        cert.failures.push_back("witness residual above residual_tol");
    if (!cert.envelopes_respected) cert.failures.push_back("envelope violated");
    if (cert.max_tail_mass_bound > spec.tail_eps * spec.tail_eps)
        cert.failures.push_back("tail mass bound above tail_eps^2");
    if (!cert.exotic) cert.failures.push_back("diagram criterion not conclusive");
    cert.certified = cert.failures.empty();
    return cert;
}

TruncatedEndo compute_truncated_endomorphisms(const ExoticSpec& spec) {
    const Eigen::Index m = spec.truncation;
    const int nb = spec.n_blocks;  // N
    const Eigen::Index blocks = nb + 1;
    const Eigen::Index params = blocks * m * m;
    if (params > 4608)
        throw std::invalid_argument(
            "compute_truncated_endomorphisms: (N+1) M^2 = " + std::to_string(params) +
            " parameters exceed the dense cap; lower the endo truncation");

    // Per-block diagonal operators: B_{w_1}..B_{w_N}, then S.
    std::vector<Eigen::MatrixXd> diag_ops;
    for (int p = 1; p <= nb; ++p) {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index r = 0; r + 1 < m; ++r) b(r, r + 1) = spec.w(p, r + 1);
        diag_ops.push_back(std::move(b));
    }
    {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index r = 0; r + 1 < m; ++r) s(r + 1, r) = 1.0;
        diag_ops.push_back(std::move(s));
    }
    const Eigen::MatrixXd& s_op = diag_ops.back();

    // A is determined by its first block row: block row p of [A, T] vanishes
    // for p <= N, which propagates A_{p+1,q} = A_{pq} B_q + A_{p,q-1} - B_p A_{pq}.
    auto propagate = [&](const std::vector<Eigen::MatrixXd>& first_row) {
        std::vector<std::vector<Eigen::MatrixXd>> rows{first_row};
        for (int p = 0; p < nb; ++p) {
            const auto& prev = rows.back();
            std::vector<Eigen::MatrixXd> next;
            for (Eigen::Index q = 0; q < blocks; ++q) {
                Eigen::MatrixXd x = prev[static_cast<std::size_t>(q)] * diag_ops[static_cast<std::size_t>(q)] -
                                    diag_ops[static_cast<std::size_t>(p)] * prev[static_cast<std::size_t>(q)];
                if (q > 0) x += prev[static_cast<std::size_t>(q - 1)];
                next.push_back(std::move(x));
            }
            rows.push_back(std::move(next));
        }
        return rows;
    };

    // Residual constraints: rows 2..M of block row N+1 of [A, T], plus
    // A g in span(g).
    const Eigen::Index constraint_rows = blocks * (m - 1) * m + nb * m + (m - 1);
    auto constraints_of = [&](const std::vector<std::vector<Eigen::MatrixXd>>& rows) {
        Eigen::VectorXd con(constraint_rows);
        Eigen::Index at = 0;
        const auto& last = rows.back();
        for (Eigen::Index q = 0; q < blocks; ++q) {
            Eigen::MatrixXd r = last[static_cast<std::size_t>(q)] * diag_ops[static_cast<std::size_t>(q)] -
                                s_op * last[static_cast<std::size_t>(q)];
            if (q > 0) r += last[static_cast<std::size_t>(q - 1)];
            for (Eigen::Index col = 0; col < m; ++col)
                for (Eigen::Index row = 1; row < m; ++row) con(at++) = r(row, col);
        }
        for (int p = 0; p < nb; ++p)
            for (Eigen::Index row = 0; row < m; ++row)
                con(at++) = rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(blocks - 1)](row, 0);
        for (Eigen::Index row = 1; row < m; ++row)
            con(at++) = rows[static_cast<std::size_t>(nb)][static_cast<std::size_t>(blocks - 1)](row, 0);
        return con;
    };

    Eigen::MatrixXd constraint(constraint_rows, params);
    std::vector<Eigen::MatrixXd> unit_row(static_cast<std::size_t>(blocks),
                                          Eigen::MatrixXd::Zero(m, m));
    Eigen::Index col = 0;
    for (Eigen::Index q = 0; q < blocks; ++q)
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index i = 0; i < m; ++i) {
                unit_row[static_cast<std::size_t>(q)](i, j) = 1.0;
                constraint.col(col++) = constraints_of(propagate(unit_row));
                unit_row[static_cast<std::size_t>(q)](i, j) = 0.0;
            }

    const linalg::Matrix kernel = linalg::nullspace(constraint.cast<linalg::Complex>(), spec.policy);

    TruncatedEndo out;
    out.k_dim = spec.k_dim();
    for (Eigen::Index v = 0; v < kernel.cols(); ++v) {
        const Eigen::VectorXd par = kernel.col(v).real();
        if (kernel.col(v).imag().norm() > 1e-12 * par.norm())
            throw std::logic_error("compute_truncated_endomorphisms: complex kernel vector");
        std::vector<Eigen::MatrixXd> first_row;
        for (Eigen::Index q = 0; q < blocks; ++q) {
            Eigen::MatrixXd blk(m, m);
            for (Eigen::Index j = 0; j < m; ++j)
                blk.col(j) = par.segment(q * m * m + j * m, m);
            first_row.push_back(std::move(blk));
        }
        const auto rows = propagate(first_row);
        Eigen::MatrixXd a(out.k_dim, out.k_dim);
        for (Eigen::Index p = 0; p < blocks; ++p)
            for (Eigen::Index q = 0; q < blocks; ++q)
                a.block(p * m, q * m, m, m) = rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
        out.basis.push_back(std::move(a));
    }
    return out;
}

bool CascadeChecks::pass(double tol) const {
    return last_block_row_max <= tol && diag_lower_max <= tol && s_block_scalar_max <= tol &&
           subdiag_upper_shape_max <= tol && recurrence_max <= tol;
}

std::vector<double> divergence_recursion(const weights::WeightFamily& family, int i_hi, int i_lo,
                                         int j_max) {
    if (i_hi <= i_lo) throw std::invalid_argument("divergence_recursion: need i_hi > i_lo");
    const auto& schedule = family.schedule();
    if (schedule.size() < static_cast<std::size_t>(j_max))
        throw std::invalid_argument("divergence_recursion: schedule too short");
    std::vector<double> at_breakpoints;
    double v = -1.0 / family.w(i_lo, 1);
    std::int64_t n = 1;
    for (int j = 1; j <= j_max; ++j) {
        const std::int64_t target = schedule.at(static_cast<std::size_t>(j)).n;
        while (n < target) {
            v = (family.w(i_hi, n) / family.w(i_lo, n + 1)) * v - 1.0 / family.w(i_lo, n + 1);
            ++n;
        }
        at_breakpoints.push_back(std::abs(v));
    }
    return at_breakpoints;
}

EvidenceReport indecomposability_evidence(const ExoticSpec& spec, Eigen::Index endo_truncation,
                                          int attempts, std::uint64_t seed) {
    EvidenceReport report;
    const ExoticSpec espec =
        make_spec(spec.n_blocks, std::min(endo_truncation, spec.truncation), spec.policy, spec.tail_eps);
    report.endo_truncation = espec.truncation;
    const Eigen::Index m = espec.truncation;
    const int nb = espec.n_blocks;

    const TruncatedEndo endo_space = compute_truncated_endomorphisms(espec);
    report.dim_end = endo_space.dim();
    report.transitive = endo_space.dim() == 1;

    CascadeChecks& c = report.cascade;
    for (const auto& a : endo_space.basis) {
        const double scale = std::max(1.0, a.norm());
        auto blk = [&](int p, int q) { return a.block((p - 1) * m, (q - 1) * m, m, m); };
        for (int q = 1; q <= nb; ++q)
            c.last_block_row_max =
                std::max(c.last_block_row_max, blk(nb + 1, q).cwiseAbs().maxCoeff() / scale);
        for (int p = 1; p <= nb + 1; ++p) {
            const Eigen::MatrixXd d = blk(p, p);
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < i; ++j)
                    c.diag_lower_max = std::max(c.diag_lower_max, std::abs(d(i, j)) / scale);
        }
        {
            const Eigen::MatrixXd d = blk(nb + 1, nb + 1);
            const Eigen::MatrixXd dev = d - d(0, 0) * Eigen::MatrixXd::Identity(m, m);
            c.s_block_scalar_max =
                std::max(c.s_block_scalar_max, dev.cwiseAbs().maxCoeff() / scale);
        }
        for (int p = 2; p <= nb + 1; ++p)
            for (int q = 1; q < p; ++q) {
                const Eigen::MatrixXd d = blk(p, q);
                for (Eigen::Index i = 0; i < m; ++i)
                    for (Eigen::Index j = 0; j <= i; ++j)
                        c.subdiag_upper_shape_max =
                            std::max(c.subdiag_upper_shape_max, std::abs(d(i, j)) / scale);
            }
        // First-column recurrence  w_p(k) A_{p1}(k+1,n) = w_1(n-1) A_{p1}(k,n-1) - A_{p+1,1}(k,n).
        for (int p = 1; p <= nb; ++p) {
            const Eigen::MatrixXd d = blk(p, 1);
            const Eigen::MatrixXd next = blk(p + 1, 1);
            for (Eigen::Index k0 = 0; k0 + 1 < m; ++k0)
                for (Eigen::Index n0 = 1; n0 < m; ++n0) {
                    const double lhs = espec.w(p, k0 + 1) * d(k0 + 1, n0);
                    const double rhs = espec.family.w(1, n0) * d(k0, n0 - 1) - next(k0, n0);
                    c.recurrence_max = std::max(c.recurrence_max, std::abs(lhs - rhs) / scale);
                }
        }
    }
    report.cascade_pass = c.pass(1e3 * espec.policy.residual_tol);

    // Idempotent hunt on the A-algebra (V = A (+) A is idempotent iff A is).
    {
        std::vector<linalg::Matrix> basis;
        for (const auto& a : endo_space.basis) basis.push_back(a.cast<linalg::Complex>());
        endo::EndoAlgebra alg(endo_space.k_dim, std::move(basis), espec.policy);
        const auto search = endo::find_nontrivial_idempotent(alg, attempts, seed, espec.policy);
        report.idempotent_found = search.witness.has_value();
        if (search.witness)
            report.idempotent_rank =
                static_cast<Eigen::Index>(std::lround(search.witness->trace().real()));
        report.attempts = search.attempts_used;
        report.skipped = search.skipped;
    }

    // Divergence mechanism that kills the off-diagonal artifacts as M grows.
    {
        const int j_max = std::min<int>(5, static_cast<int>(spec.family.schedule().size()));
        weights::WeightFamily family(weights::build_breakpoints(std::max(j_max, 5)));
        report.divergence_at_breakpoints = divergence_recursion(family, 2, 1, 5);
    }

    report.triangular = endo::triangular_idempotent_check(200, 12, seed + 1, espec.policy);
    return report;
}

Eigen::VectorXcd shift_eigenvector(const weights::WeightFamily& family, int i,
                                   linalg::Complex lambda, Eigen::Index length) {
    Eigen::VectorXcd x(length);
    x(0) = 1.0;
    for (Eigen::Index n = 1; n < length; ++n) x(n) = lambda * x(n - 1) / family.w(i, n);
    return x;
}

Eigen::VectorXcd shift_eigenvector(const ExoticSpec& spec, int i, linalg::Complex lambda) {
    return shift_eigenvector(spec.family, i, lambda, spec.truncation);
}

double eigenvector_residual(const weights::WeightFamily& family, int i, linalg::Complex lambda,
                            const Eigen::VectorXcd& x) {
    const auto w = [&family, i](std::int64_t n) { return family.w(i, n); };
    Eigen::VectorXcd bx = Eigen::VectorXcd::Zero(x.size());
    bx.head(x.size() - 1) = backward_shift_apply(w, x);
    return (bx - lambda * x).norm() / x.norm();
}

nlohmann::ordered_json ledger_to_json(const DefectLedger& ledger) {
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& p : ledger.pairs)
        pairs.push_back({{"i", p.i},
                         {"j", p.j},
                         {"dim_intersection", p.dim_intersection},
                         {"dim_sum_complement", p.dim_sum_complement},
                         {"source", p.source}});
    return {{"n_blocks", ledger.n_blocks},
            {"defect_num", numerator(ledger.defect).str()},
            {"defect_den", denominator(ledger.defect).str()},
            {"pairs", pairs}};
}

nlohmann::ordered_json certificate_to_json(const ExoticCertificate& cert) {
    nlohmann::ordered_json out{{"n_blocks", cert.n_blocks},
                               {"truncation", cert.truncation},
                               {"certified", cert.certified},
                               {"exotic", cert.exotic},
                               {"max_witness_residual", cert.max_witness_residual},
                               {"envelopes_respected", cert.envelopes_respected},
                               {"max_tail_mass_bound", cert.max_tail_mass_bound},
                               {"zero_pair_max_cosine", cert.zero_pair_max_cosine},
                               {"diagram", systems::diagram_to_json(cert.diagram)},
                               {"ledger", ledger_to_json(cert.ledger)},
                               {"failures", cert.failures}};
    out["witness_counts"] = {{"e1_e3", cert.e1_e3_witnesses.size()},
                             {"e2_e3", 1},
                             {"e3_e4", cert.e3_e4_witnesses.size()}};
    return out;
}

nlohmann::ordered_json evidence_to_json(const EvidenceReport& report) {
    return {{"label", "evidence"},
            {"endo_truncation", report.endo_truncation},
            {"dim_end", report.dim_end},
            {"transitive", report.transitive},
            {"cascade",
             {{"last_block_row_max", report.cascade.last_block_row_max},
              {"diag_lower_max", report.cascade.diag_lower_max},
              {"s_block_scalar_max", report.cascade.s_block_scalar_max},
              {"subdiag_upper_shape_max", report.cascade.subdiag_upper_shape_max},
              {"recurrence_max", report.cascade.recurrence_max},
              {"pass", report.cascade_pass}}},
            {"idempotent_found", report.idempotent_found},
            {"idempotent_rank", report.idempotent_rank},
            {"attempts", report.attempts},
            {"skipped", report.skipped},
            {"divergence_at_breakpoints", report.divergence_at_breakpoints},
            {"triangular_idempotent",
             {{"trials", report.triangular.trials},
              {"nontrivial_idempotents", report.triangular.nontrivial_idempotents},
              {"nilpotency_collapse_ok", report.triangular.nilpotency_collapse_ok}}}};
}

void write_witness_csv(std::ostream& os, const ExoticCertificate& cert) {
    os << "witness,pair,coordinate,value\n";
    os.precision(17);
    auto dump = [&os](const std::string& label, const std::string& pair, const Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (v(i) != 0.0) os << label << "," << pair << "," << i << "," << v(i) << "\n";
    };
    for (std::size_t j = 0; j < cert.e1_e3_witnesses.size(); ++j)
        dump("e1_e3_" + std::to_string(j + 1), "(1,3)", cert.e1_e3_witnesses[j]);
    dump("e2_e3_1", "(2,3)", cert.e2_e3_witness);
    for (std::size_t j = 0; j < cert.e3_e4_witnesses.size(); ++j)
        dump("e3_e4_" + std::to_string(j + 1), "(3,4)", cert.e3_e4_witnesses[j]);
}

}  // namespace fourspace::exotic
