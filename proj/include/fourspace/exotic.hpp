#pragma once

// The exotic systems S_{w,N}: one unilateral-shift block on top of N
// weighted backward-shift blocks, glued by superdiagonal identities, with
// E_3 = graph(T) + C((0,...,0) (+) (0,...,0,e_1)).  Intersection bases come
// from the paper-exact recursions; finite compressions are used only for
// cross-validation via angles and residuals, because truncation provably
// distorts both the intersections and the defect.

#include "fourspace/endo.hpp"
#include "fourspace/system.hpp"
#include "fourspace/weights.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace fourspace::exotic {

using linalg::TolerancePolicy;

struct ExoticSpec {
    int n_blocks = 1;             // N: weighted-shift blocks
    Eigen::Index truncation = 256;  // M: length per l^2 factor
    weights::WeightFamily family;
    TolerancePolicy policy;
    double tail_eps = 1e-12;

    Eigen::Index block_count() const { return n_blocks + 1; }
    Eigen::Index k_dim() const { return block_count() * truncation; }  // dim K
    Eigen::Index ambient() const { return 2 * k_dim(); }

    /// w_i(k) with the unilateral shift's constant weight 1 for i = N+1.
    double w(int i, std::int64_t k) const;
};

ExoticSpec make_spec(int n_blocks, Eigen::Index truncation,
                     const TolerancePolicy& policy = {}, double tail_eps = 1e-12);

/// A decaying sequence defined by the fixed-point recursion
/// u(1) = c, u(n+1) = (u(n) - b(n)) / w(n), carrying the certified envelope
/// |u(n+1)| <= q(n) (3/4)^n with q one degree above b's envelope.
class LazyVector {
public:
    using WeightFn = std::function<double(std::int64_t)>;

    LazyVector() = default;  // the zero sequence

    static LazyVector fixed_point(WeightFn w, std::shared_ptr<const LazyVector> b, double c);

    double entry(std::int64_t n) const;  // 1-based
    bool zero() const { return !w_; }

    const std::vector<double>& envelope_coeffs() const { return coeffs_; }
    /// Envelope value bounding |entry(n+1)|: q(n) (3/4)^n  (n >= 1).
    double envelope(std::int64_t n) const;
    /// Upper bound on sum_{m > beyond} entry(m)^2 from the envelope alone.
    double tail_mass_bound(std::int64_t beyond) const;

    Eigen::VectorXd prefix(Eigen::Index len) const;

private:
    WeightFn w_;
    std::shared_ptr<const LazyVector> b_;
    double c_ = 0.0;
    std::vector<double> coeffs_;  // envelope polynomial, ascending powers
    mutable std::vector<double> memo_;
};

/// (B_w x)(n) = w(n) x(n+1); output one entry shorter.
Eigen::VectorXd backward_shift_apply(const LazyVector::WeightFn& w, const Eigen::VectorXd& x);
Eigen::VectorXcd backward_shift_apply(const LazyVector::WeightFn& w, const Eigen::VectorXcd& x);

/// Solution of B_{w_j} u + b = u with u(1) = c, per the closed recursion.
LazyVector solve_fixed_point(LazyVector::WeightFn w, std::shared_ptr<const LazyVector> b, double c);

/// The compressed operator T on K: diagonal blocks B_{w_1}..B_{w_N}, S;
/// identity superdiagonal; top-left M x M corner of each infinite block.
Eigen::MatrixXd build_t(const ExoticSpec& spec);

/// The truncated system (H; E_1, E_2, E_3, E_4) with
/// E_3 = graph(T_M) + C((0,...,0) (+) (0,...,0,e_1)).
systems::FourSystem build_system(const ExoticSpec& spec);

/// Index (0-based, within K) of the distinguished generator's coordinate.
Eigen::Index distinguished_index(const ExoticSpec& spec);

/// N finitely supported vectors spanning E_1 cap E_3 exactly (ambient
/// coordinates; second half zero).  Parameters (x_j(1)) run over unit
/// vectors.
std::vector<Eigen::VectorXd> exact_basis_e1_cap_e3(const ExoticSpec& spec);

/// The single generator of E_2 cap E_3: 0 (+) (0,...,0,e_1).
Eigen::VectorXd basis_e2_cap_e3(const ExoticSpec& spec);

/// One solution chain x_1..x_N of T x = x (y = 0, alpha = 0); the E_3 cap
/// E_4 element is (x_1,...,x_N,0) (+) (x_1,...,x_N,0).
struct ChainWitness {
    int parameter_index = 1;            // j0 with c_{j0} = 1, other c_j = 0
    std::vector<LazyVector> components;  // x_1..x_N
    Eigen::VectorXd ambient_vector(const ExoticSpec& spec) const;
};

std::vector<ChainWitness> exact_basis_e3_cap_e4(const ExoticSpec& spec);

struct LedgerPair {
    int i = 0, j = 0;
    Eigen::Index dim_intersection = 0;
    Eigen::Index dim_sum_complement = 0;
    std::string source;  // "exact_basis" or "structural"
};

struct DefectLedger {
    int n_blocks = 0;
    std::array<LedgerPair, 6> pairs;
    Rational defect;  // (2N+1)/3
};

/// Exact defect (2N+1)/3 assembled from the exact intersection bases and the
/// structurally-zero pairs and complements.
DefectLedger defect_exotic(const ExoticSpec& spec);

enum class L2Verdict { genuine, escaping };

/// Classify a candidate family across increasing truncations: Cauchy
/// (successive distances below tail_eps) -> genuine; norm growth -> escaping.
L2Verdict l2_membership_test(const std::vector<Eigen::VectorXd>& candidates, double tail_eps);

struct ExoticCertificate {
    int n_blocks = 0;
    Eigen::Index truncation = 0;
    systems::IntersectionDiagram diagram;  // from the exact dims
    DefectLedger ledger;
    bool exotic = false;
    bool certified = false;
    double max_witness_residual = 0.0;
    bool envelopes_respected = true;
    double max_tail_mass_bound = 0.0;
    std::array<double, 3> zero_pair_max_cosine{};  // (1,2), (1,4), (2,4)
    std::vector<std::string> failures;
    std::vector<Eigen::VectorXd> e1_e3_witnesses;
    Eigen::VectorXd e2_e3_witness;
    std::vector<Eigen::VectorXd> e3_e4_witnesses;
};

ExoticCertificate verify_exotic(const ExoticSpec& spec);

/// End of the truncated system, reduced to V = A (+) A with
/// [A, T] supported on the distinguished row and A g in span(g).  The
/// A-matrices (K x K) are returned; parameters in the first block row are
/// eliminated by the block recurrence.
struct TruncatedEndo {
    Eigen::Index k_dim = 0;
    std::vector<Eigen::MatrixXd> basis;
    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }
};

TruncatedEndo compute_truncated_endomorphisms(const ExoticSpec& spec);

struct CascadeChecks {
    double last_block_row_max = 0.0;   // blocks (N+1, q), q <= N
    double diag_lower_max = 0.0;       // strict lower parts of diagonal blocks
    double s_block_scalar_max = 0.0;   // ||A_{N+1,N+1} - lambda I||_max
    double subdiag_upper_shape_max = 0.0;  // blocks p > q: lower + diagonal part
    double recurrence_max = 0.0;       // first-column recurrence residual
    bool pass(double tol) const;
};

/// Divergent-entry mechanism: the recursion
/// v(n+1) = (w_hi(n)/w_lo(n+1)) v(n) - 1/w_lo(n+1), v(1) = -1/w_lo(1);
/// returns |v| sampled at the breakpoints n_1..n_{j_max}.
std::vector<double> divergence_recursion(const weights::WeightFamily& family, int i_hi, int i_lo,
                                         int j_max);

struct EvidenceReport {
    Eigen::Index endo_truncation = 0;
    Eigen::Index dim_end = 0;
    bool transitive = false;
    CascadeChecks cascade;
    bool cascade_pass = false;
    bool idempotent_found = false;
    Eigen::Index idempotent_rank = 0;
    int attempts = 0;
    int skipped = 0;
    std::vector<double> divergence_at_breakpoints;
    endo::TriangularIdempotentReport triangular;
    // Evidence only: truncation is not claimed to preserve indecomposability.
};

EvidenceReport indecomposability_evidence(const ExoticSpec& spec, Eigen::Index endo_truncation = 12,
                                          int attempts = 64, std::uint64_t seed = 0);

/// Point-spectrum witness x(n+1) = lambda^n / prod_{k<=n} w_i(k), x(1) = 1.
Eigen::VectorXcd shift_eigenvector(const ExoticSpec& spec, int i, linalg::Complex lambda);
Eigen::VectorXcd shift_eigenvector(const weights::WeightFamily& family, int i,
                                   linalg::Complex lambda, Eigen::Index length);
/// Relative residual ||B_w x - lambda x|| / ||x|| at the truncation.
double eigenvector_residual(const weights::WeightFamily& family, int i, linalg::Complex lambda,
                            const Eigen::VectorXcd& x);

nlohmann::ordered_json ledger_to_json(const DefectLedger& ledger);
nlohmann::ordered_json certificate_to_json(const ExoticCertificate& cert);
nlohmann::ordered_json evidence_to_json(const EvidenceReport& report);
void write_witness_csv(std::ostream& os, const ExoticCertificate& cert);

}  // namespace fourspace::exotic
