#include "fourspace/system.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fourspace::systems {

FourSystem::FourSystem(Eigen::Index ambient_dim, std::array<Subspace, 4> e)
    : ambient(ambient_dim), spaces(std::move(e)) {
    for (const auto& sub : spaces)
        if (sub.ambient_dim() != ambient)
            throw std::invalid_argument("FourSystem: subspaces must share the ambient dimension");
}

FourSystem operator_system(const Matrix& a, const Matrix& b, const TolerancePolicy& policy) {
    const Eigen::Index k1 = a.cols();
    const Eigen::Index k2 = a.rows();
    if (b.rows() != k1 || b.cols() != k2)
        throw std::invalid_argument("operator_system: B must map K2 -> K1");
    const Eigen::Index d = k1 + k2;

    Matrix e1 = Matrix::Zero(d, k1);
    e1.topRows(k1) = Matrix::Identity(k1, k1);
    Matrix e2 = Matrix::Zero(d, k2);
    e2.bottomRows(k2) = Matrix::Identity(k2, k2);
    Matrix e3(d, k1);
    e3.topRows(k1) = Matrix::Identity(k1, k1);
    e3.bottomRows(k2) = a;
    Matrix e4(d, k2);
    e4.topRows(k1) = b;
    e4.bottomRows(k2) = Matrix::Identity(k2, k2);

    return FourSystem(d, {Subspace::from_span(e1, policy), Subspace::from_span(e2, policy),
                          Subspace::from_span(e3, policy), Subspace::from_span(e4, policy)});
}

FourSystem operator_system(const Matrix& a, const TolerancePolicy& policy) {
    return operator_system(a, Matrix::Identity(a.cols(), a.rows()), policy);
}

FourSystem direct_sum(const FourSystem& s, const FourSystem& t) {
    const Eigen::Index d = s.ambient + t.ambient;
    std::array<Subspace, 4> spaces;
    TolerancePolicy policy;
    for (int i = 0; i < 4; ++i) {
        const auto& su = s.spaces[static_cast<std::size_t>(i)];
        const auto& tu = t.spaces[static_cast<std::size_t>(i)];
        Matrix basis = Matrix::Zero(d, su.dim() + tu.dim());
        basis.block(0, 0, s.ambient, su.dim()) = su.basis();
        basis.block(s.ambient, su.dim(), t.ambient, tu.dim()) = tu.basis();
        spaces[static_cast<std::size_t>(i)] = Subspace::from_orthonormal(std::move(basis), policy);
    }
    return FourSystem(d, std::move(spaces));
}

long defect_gp(const FourSystem& s) {
    long total = 0;
    for (const auto& sub : s.spaces) total += static_cast<long>(sub.dim());
    return total - 2 * static_cast<long>(s.ambient);
}

Rational defect_quasi_fredholm(const FourSystem& s, const TolerancePolicy& policy) {
    long total = 0;
    for (int i = 1; i <= 4; ++i)
        for (int j = i + 1; j <= 4; ++j) {
            const auto info = subspaces::adding_map_info(s.e(i), s.e(j), policy);
            const long complement = static_cast<long>(s.ambient) - static_cast<long>(info.dim_sum);
            total += static_cast<long>(info.intersection.dim()) - complement;
        }
    return Rational(total, 3);
}

bool IntersectionDiagram::has_edge(int i, int j) const {
    return pair(i, j).dim_intersection == 0;
}

const PairData& IntersectionDiagram::pair(int i, int j) const {
    return const_cast<IntersectionDiagram*>(this)->pair(i, j);
}

PairData& IntersectionDiagram::pair(int i, int j) {
    if (i > j) std::swap(i, j);
    for (auto& p : pairs)
        if (p.i == i && p.j == j) return p;
    throw std::invalid_argument("IntersectionDiagram: invalid pair");
}

std::vector<std::pair<int, int>> IntersectionDiagram::edges() const {
    std::vector<std::pair<int, int>> result;
    for (const auto& p : pairs)
        if (p.dim_intersection == 0) result.emplace_back(p.i, p.j);
    std::sort(result.begin(), result.end());
    return result;
}

IntersectionDiagram intersection_diagram(const FourSystem& s, const TolerancePolicy& policy) {
    IntersectionDiagram d;
    int idx = 0;
    for (int i = 1; i <= 4; ++i)
        for (int j = i + 1; j <= 4; ++j) {
            PairData p;
            p.i = i;
            p.j = j;
            const auto info = subspaces::adding_map_info(s.e(i), s.e(j), policy);
            p.dim_intersection = info.intersection.dim();
            p.dim_sum_complement = s.ambient - info.dim_sum;
            const auto angles = subspaces::principal_angles(s.e(i), s.e(j));
            p.min_principal_angle = angles.empty() ? M_PI / 2.0 : angles.front();
            d.pairs[static_cast<std::size_t>(idx++)] = p;
        }
    return d;
}

std::optional<std::array<int, 4>> operator_system_necessary_condition(const IntersectionDiagram& d) {
    // Path 4-1-2-3 after relabeling: edges {p4,p1}, {p1,p2}, {p2,p3}.
    std::array<int, 4> perm = {1, 2, 3, 4};
    std::sort(perm.begin(), perm.end());
    do {
        if (d.has_edge(perm[3], perm[0]) && d.has_edge(perm[0], perm[1]) &&
            d.has_edge(perm[1], perm[2]))
            return perm;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

bool exotic_by_diagram(const IntersectionDiagram& d) {
    return !operator_system_necessary_condition(d).has_value();
}

bool exotic_by_diagram(const FourSystem& s, const TolerancePolicy& policy) {
    return exotic_by_diagram(intersection_diagram(s, policy));
}

std::string to_dot(const IntersectionDiagram& d) {
    std::ostringstream os;
    os << "graph intersection_diagram {\n";
    for (int i = 1; i <= 4; ++i) os << "  n" << i << ";\n";
    for (const auto& [i, j] : d.edges()) os << "  n" << i << " -- n" << j << ";\n";
    os << "}\n";
    return os.str();
}

nlohmann::ordered_json diagram_to_json(const IntersectionDiagram& d) {
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& p : d.pairs)
        pairs.push_back({{"i", p.i},
                         {"j", p.j},
                         {"dim_intersection", p.dim_intersection},
                         {"dim_sum_complement", p.dim_sum_complement},
                         {"min_principal_angle", p.min_principal_angle}});
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& [i, j] : d.edges()) edges.push_back({i, j});
    return {{"edges", edges}, {"pairs", pairs}};
}

nlohmann::ordered_json system_report(const FourSystem& s, const TolerancePolicy& policy) {
    const IntersectionDiagram d = intersection_diagram(s, policy);
    nlohmann::ordered_json dims = nlohmann::ordered_json::array();
    for (const auto& sub : s.spaces) dims.push_back(sub.dim());
    const Rational qf = defect_quasi_fredholm(s, policy);
    const auto perm = operator_system_necessary_condition(d);
    nlohmann::ordered_json out{{"ambient_dim", s.ambient},
                               {"dims", dims},
                               {"defect_gp", defect_gp(s)},
                               {"defect_qf_num", numerator(qf).str()},
                               {"defect_qf_den", denominator(qf).str()},
                               {"diagram", diagram_to_json(d)},
                               {"exotic_by_diagram", exotic_by_diagram(d)}};
    if (perm) out["operator_path_permutation"] = *perm;
    return out;
}

}  // namespace fourspace::systems
