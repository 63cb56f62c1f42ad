#include "fourspace/weights.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace fourspace::weights {

std::size_t BreakpointSchedule::interval_index(std::int64_t k) const {
    if (k < 1) throw std::out_of_range("interval_index: k must be >= 1");
    if (bps_.empty() || k > bps_.back().n)
        throw std::out_of_range("interval_index: k=" + std::to_string(k) +
                                " beyond schedule range (max " + std::to_string(max_k()) + ")");
    auto it = std::lower_bound(bps_.begin(), bps_.end(), k,
                               [](const Breakpoint& b, std::int64_t v) { return b.n < v; });
    return static_cast<std::size_t>(it - bps_.begin()) + 1;
}

BreakpointSchedule build_breakpoints(int j_max) {
    if (j_max < 1) throw std::invalid_argument("build_breakpoints: j_max must be >= 1");
    std::vector<Breakpoint> bps;
    bps.push_back({1, Rational(2), true});  // c(1) = 2, n_1 = 1
    for (int j = 2; j <= j_max; ++j) {
        const Breakpoint& prev = bps.back();
        const Rational prev_len(prev.n + 1);
        Breakpoint next;
        next.rising = (j % 2 == 1);
        if (next.rising) {
            // P(n) = P_prev * (n+1)/(n_prev+1) > j  <=>  n+1 > j (n_prev+1)/P_prev
            next.n = floor_to_int64(Rational(j) * prev_len / prev.product);
            next.product = prev.product * Rational(next.n + 1) / prev_len;
        } else {
            // P(n) = P_prev * (n_prev+1)/(n+1) < 1/j  <=>  n+1 > j P_prev (n_prev+1)
            next.n = floor_to_int64(Rational(j) * prev.product * prev_len);
            next.product = prev.product * prev_len / Rational(next.n + 1);
        }
        bps.push_back(std::move(next));
    }
    return BreakpointSchedule(std::move(bps));
}

BreakpointSchedule build_breakpoints_covering(std::int64_t k_max) {
    if (k_max < 1) throw std::invalid_argument("build_breakpoints_covering: k_max must be >= 1");
    int j = 1;
    BreakpointSchedule s = build_breakpoints(j);
    while (s.max_k() < k_max) s = build_breakpoints(++j);
    return s;
}

Rational c_value(const BreakpointSchedule& schedule, std::int64_t k) {
    return schedule.rising_at(k) ? Rational(k + 1, k) : Rational(k, k + 1);
}

Rational base_product(const BreakpointSchedule& schedule, std::int64_t n) {
    const std::size_t j = schedule.interval_index(n);
    const std::int64_t n_prev = (j == 1) ? 0 : schedule.at(j - 1).n;
    const Rational p_prev = (j == 1) ? Rational(1) : schedule.at(j - 1).product;
    if (j % 2 == 1) return p_prev * Rational(n + 1) / Rational(n_prev + 1);
    return p_prev * Rational(n_prev + 1) / Rational(n + 1);
}

double WeightFamily::c_double(std::int64_t k) const {
    const double kd = static_cast<double>(k);
    return schedule_.rising_at(k) ? (kd + 1.0) / kd : kd / (kd + 1.0);
}

double WeightFamily::exponent(int i) {
    if (i < 1) throw std::invalid_argument("exponent: i must be >= 1");
    if (i == 1) return 0.0;
    return 1.0 - std::ldexp(1.0, 1 - i);
}

double WeightFamily::a(int i, std::int64_t k) const {
    if (i < 1) throw std::invalid_argument("a: i must be >= 1");
    if (i == 1) {
        schedule_.interval_index(k);  // range check
        return 1.0;
    }
    return std::pow(c_double(k), exponent(i));
}

namespace {

class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

double WeightFamily::log_partial_product(int i, std::int64_t n) const {
    KahanSum s;
    for (std::int64_t k = 1; k <= n; ++k) s.add(std::log(a(i, k)));
    return s.value();
}

double WeightFamily::log_ratio_product(int i, int j, std::int64_t n) const {
    KahanSum s;
    for (std::int64_t k = 1; k <= n; ++k) s.add(std::log(a(i, k)) - std::log(a(j, k)));
    return s.value();
}

bool SequenceReport::all_pass() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const Clause& c) { return c.pass; });
}

const Clause* SequenceReport::first_failure() const {
    for (const auto& c : clauses)
        if (!c.pass) return &c;
    return nullptr;
}

SequenceReport verify_sequence_properties(const WeightFamily& family, int i_max, int j_max) {
    if (i_max < 1 || j_max < 1)
        throw std::invalid_argument("verify_sequence_properties: i_max, j_max must be >= 1");
    const auto& schedule = family.schedule();
    if (schedule.size() < static_cast<std::size_t>(j_max))
        throw std::invalid_argument("verify_sequence_properties: schedule covers only " +
                                    std::to_string(schedule.size()) + " breakpoints");
    SequenceReport report;

    // (a) bounds 2/3 <= a_i <= 2 and 4/3 <= w_i <= 4 on sampled k.
    {
        bool ok = true;
        std::string detail;
        const std::int64_t k_cap = std::min<std::int64_t>(schedule.max_k(), 10000);
        auto check_k = [&](std::int64_t k) {
            for (int i = 1; i <= i_max && ok; ++i) {
                const double a = family.a(i, k);
                if (!(a >= 2.0 / 3.0 && a <= 2.0) || !(2.0 * a >= 4.0 / 3.0 && 2.0 * a <= 4.0)) {
                    ok = false;
                    detail = "violated at i=" + std::to_string(i) + " k=" + std::to_string(k);
                }
            }
        };
        for (std::int64_t k = 1; k <= k_cap && ok; ++k) check_k(k);
        for (int j = 1; j <= j_max && ok; ++j) {
            const std::int64_t n = schedule.at(static_cast<std::size_t>(j)).n;
            for (std::int64_t k = std::max<std::int64_t>(1, n - 2); k <= std::min(schedule.max_k(), n + 2) && ok; ++k)
                check_k(k);
        }
        report.clauses.push_back({"bounds", ok, ok ? "2/3 <= a_i <= 2 on all sampled k" : detail});
    }

    // (b)/(c) ratio products at breakpoints against the exact base product.
    // prod_k a_i/a_j = P^(e_i - e_j); at odd breakpoints P > j so the
    // divergent orientation exceeds j^|e|, at even ones it falls below
    // (1/j)^|e|.
    for (int i = 2; i <= i_max; ++i) {
        for (int i2 = 1; i2 < i; ++i2) {
            const double e = WeightFamily::exponent(i) - WeightFamily::exponent(i2);
            bool ok = true;
            std::string detail;
            for (int j = 1; j <= j_max && ok; ++j) {
                const auto& bp = schedule.at(static_cast<std::size_t>(j));
                const double log_ratio = family.log_ratio_product(i, i2, bp.n);
                const double log_exact = e * std::log(to_double(bp.product));
                const double rel = std::abs(log_ratio - log_exact) /
                                   std::max(1.0, std::abs(log_exact));
                if (rel > 1e-11) {
                    ok = false;
                    detail = "ratio/product mismatch at j=" + std::to_string(j) +
                             ", rel=" + std::to_string(rel);
                    break;
                }
                const double bound = e * std::log(static_cast<double>(j));
                if (j % 2 == 1 && j > 1 && !(log_ratio > bound)) {
                    ok = false;
                    detail = "odd breakpoint bound failed at j=" + std::to_string(j);
                } else if (j % 2 == 0 && !(log_ratio < -bound)) {
                    ok = false;
                    detail = "even breakpoint bound failed at j=" + std::to_string(j);
                }
            }
            report.clauses.push_back({"ratio(i=" + std::to_string(i) + ",i'=" + std::to_string(i2) + ")",
                                      ok, ok ? "matches exact product at all breakpoints" : detail});
        }
    }

    // (d) a_i(k) -> 1 along sampled tails: |a_i(k) - 1| <= 1/k and decreasing
    // along a geometric sample.
    {
        bool ok = true;
        std::string detail;
        for (int i = 1; i <= i_max && ok; ++i) {
            double prev = 2.0;
            for (std::int64_t k = 10; k <= schedule.max_k() && ok; k *= 10) {
                const double dev = std::abs(family.a(i, k) - 1.0);
                if (dev > 1.0 / static_cast<double>(k) || dev > prev + 1e-15) {
                    ok = false;
                    detail = "tail deviation at i=" + std::to_string(i) + " k=" + std::to_string(k);
                }
                prev = dev;
            }
        }
        report.clauses.push_back({"tail", ok, ok ? "|a_i(k)-1| <= 1/k on sampled tails" : detail});
    }

    return report;
}

nlohmann::ordered_json schedule_to_json(const BreakpointSchedule& schedule) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    int j = 1;
    for (const auto& bp : schedule.breakpoints()) {
        out.push_back({{"j", j++},
                       {"n", bp.n},
                       {"product_num", numerator(bp.product).str()},
                       {"product_den", denominator(bp.product).str()},
                       {"branch", bp.rising ? "rising" : "falling"}});
    }
    return out;
}

BreakpointSchedule schedule_from_json(const nlohmann::json& j) {
    std::vector<Breakpoint> bps;
    for (const auto& item : j) {
        Breakpoint bp;
        bp.n = item.at("n").get<std::int64_t>();
        bp.product = Rational(BigInt(item.at("product_num").get<std::string>()),
                              BigInt(item.at("product_den").get<std::string>()));
        bp.rising = item.at("branch").get<std::string>() == "rising";
        bps.push_back(std::move(bp));
    }
    return BreakpointSchedule(std::move(bps));
}

nlohmann::ordered_json report_to_json(const SequenceReport& report) {
    nlohmann::ordered_json clauses = nlohmann::ordered_json::array();
    for (const auto& c : report.clauses)
        clauses.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return {{"all_pass", report.all_pass()}, {"clauses", clauses}};
}

void write_sequence_csv(std::ostream& os, const WeightFamily& family, int i_max, std::int64_t k_max) {
    os << "k,c_num,c_den";
    for (int i = 1; i <= i_max; ++i) os << ",a_" << i;
    os << "\n";
    os.precision(17);
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const Rational c = family.c(k);
        os << k << "," << numerator(c) << "," << denominator(c);
        for (int i = 1; i <= i_max; ++i) os << "," << family.a(i, k);
        os << "\n";
    }
}

}  // namespace fourspace::weights
