#pragma once

// Jiang-Wang weight sequences: the exact rational sequence c(k), the derived
// real sequences a_i(k) = c(k)^(1 - 2^(1-i)) and the shift weights
// w_i(k) = 2 a_i(k).  The breakpoint schedule n_1 < n_2 < ... steers c(k)
// between the rising branch (k+1)/k and the falling branch k/(k+1) so that
// the running product crosses j (odd j) and 1/j (even j) in alternation.

#include "fourspace/rational.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace fourspace::weights {

struct Breakpoint {
    std::int64_t n = 0;    // position n_j
    Rational product;      // exact P(n_j) = prod_{k<=n_j} c(k)
    bool rising = false;   // branch of the interval (n_{j-1}, n_j]
};

/// Ordered breakpoints n_1 < n_2 < ... with their exact running products.
/// Interval j (1-based) covers k in (n_{j-1}, n_j] and is rising for odd j.
class BreakpointSchedule {
public:
    BreakpointSchedule() = default;
    explicit BreakpointSchedule(std::vector<Breakpoint> bps) : bps_(std::move(bps)) {}

    std::size_t size() const { return bps_.size(); }
    const Breakpoint& at(std::size_t j) const { return bps_.at(j - 1); }  // 1-based
    std::int64_t max_k() const { return bps_.empty() ? 0 : bps_.back().n; }
    const std::vector<Breakpoint>& breakpoints() const { return bps_; }

    /// Index j of the interval (n_{j-1}, n_j] containing k.  Throws
    /// std::out_of_range if k exceeds the covered range.
    std::size_t interval_index(std::int64_t k) const;
    bool rising_at(std::int64_t k) const { return interval_index(k) % 2 == 1; }

private:
    std::vector<Breakpoint> bps_;
};

/// Minimal breakpoints for j = 1..j_max, by exact rational telescoping.
BreakpointSchedule build_breakpoints(int j_max);

/// Extend the schedule until it covers every k <= k_max.
BreakpointSchedule build_breakpoints_covering(std::int64_t k_max);

/// c(k) as an exact rational: (k+1)/k on rising intervals, k/(k+1) on
/// falling ones.
Rational c_value(const BreakpointSchedule& schedule, std::int64_t k);

/// Exact P(n) = prod_{k<=n} c(k) for any n <= max_k, via the telescoping
/// closed form on the interval containing n.
Rational base_product(const BreakpointSchedule& schedule, std::int64_t n);

class WeightFamily {
public:
    explicit WeightFamily(BreakpointSchedule schedule) : schedule_(std::move(schedule)) {}

    const BreakpointSchedule& schedule() const { return schedule_; }
    std::int64_t max_k() const { return schedule_.max_k(); }

    Rational c(std::int64_t k) const { return c_value(schedule_, k); }
    double c_double(std::int64_t k) const;

    /// Dyadic exponent 1 - 2^(1-i); exact in double for i <= 53.
    static double exponent(int i);

    /// a_1 = 1 exactly; a_i(k) = c(k)^(1 - 2^(1-i)) for i >= 2.
    double a(int i, std::int64_t k) const;
    /// w_i(k) = 2 a_i(k).
    double w(int i, std::int64_t k) const { return 2.0 * a(i, k); }

    /// Kahan sum of log a_i(k), k = 1..n.
    double log_partial_product(int i, std::int64_t n) const;
    /// Kahan sum of log(a_i(k)/a_j(k)), k = 1..n, each term from per-k
    /// evaluations of both sequences.
    double log_ratio_product(int i, int j, std::int64_t n) const;

private:
    BreakpointSchedule schedule_;
};

struct Clause {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SequenceReport {
    std::vector<Clause> clauses;
    bool all_pass() const;
    const Clause* first_failure() const;
};

/// Finite-n evidence for the Jiang-Wang lemma: bounds 2/3 <= a_i <= 2,
/// breakpoint ratio-product identities against the exact base product, and
/// a_i(k) -> 1 along sampled tails.  Evidence, not proof: the limit claims
/// are only checked at the covered breakpoints.
SequenceReport verify_sequence_properties(const WeightFamily& family, int i_max, int j_max);

nlohmann::ordered_json schedule_to_json(const BreakpointSchedule& schedule);
BreakpointSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::ordered_json report_to_json(const SequenceReport& report);

/// CSV rows k, c_num, c_den, a_1..a_imax for k = 1..k_max.
void write_sequence_csv(std::ostream& os, const WeightFamily& family, int i_max, std::int64_t k_max);

}  // namespace fourspace::weights
