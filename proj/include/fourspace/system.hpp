#pragma once

// Four-subspace systems: operator systems S_{T,S}, direct sums, the
// Gelfand-Ponomarev defect and its quasi-Fredholm form, intersection
// diagrams, and the path criterion separating operator systems from exotic
// ones.

#include "fourspace/rational.hpp"
#include "fourspace/subspace.hpp"

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

namespace fourspace::systems {

using linalg::Matrix;
using linalg::TolerancePolicy;
using subspaces::Subspace;

struct FourSystem {
    Eigen::Index ambient = 0;
    std::array<Subspace, 4> spaces;  // E_1..E_4

    FourSystem() = default;
    FourSystem(Eigen::Index ambient_dim, std::array<Subspace, 4> e);

    const Subspace& e(int i) const { return spaces.at(static_cast<std::size_t>(i - 1)); }
};

/// S_{A,B} in K1 (+) K2: E_1 = K1 (+) 0, E_2 = 0 (+) K2, E_3 = graph A,
/// E_4 = {(By, y)}.  A maps K1 -> K2 (k2 x k1), B maps K2 -> K1.
FourSystem operator_system(const Matrix& a, const Matrix& b, const TolerancePolicy& policy);
/// S_A = S_{A,I}.
FourSystem operator_system(const Matrix& a, const TolerancePolicy& policy);

FourSystem direct_sum(const FourSystem& s, const FourSystem& t);

/// sum dim E_i - 2 dim H.
long defect_gp(const FourSystem& s);

/// (1/3) sum_{i<j} (dim(E_i cap E_j) - dim((E_i + E_j)^perp)), exact
/// rational with denominator dividing 3.
Rational defect_quasi_fredholm(const FourSystem& s, const TolerancePolicy& policy);

struct PairData {
    int i = 0, j = 0;
    Eigen::Index dim_intersection = 0;
    Eigen::Index dim_sum_complement = 0;
    double min_principal_angle = 0.0;  // evidence for the edge decision
};

struct IntersectionDiagram {
    std::array<PairData, 6> pairs;  // (1,2),(1,3),(1,4),(2,3),(2,4),(3,4)

    bool has_edge(int i, int j) const;
    std::vector<std::pair<int, int>> edges() const;  // sorted
    const PairData& pair(int i, int j) const;
    PairData& pair(int i, int j);
};

IntersectionDiagram intersection_diagram(const FourSystem& s, const TolerancePolicy& policy);

/// Permutation p of {1,2,3,4} such that the relabeled diagram contains the
/// path 4-1-2-3, when one exists.  Containing that path is necessary for
/// closed operator systems.
std::optional<std::array<int, 4>> operator_system_necessary_condition(const IntersectionDiagram& d);

/// True when no permutation satisfies the path criterion: a sufficient
/// certificate that the system is not isomorphic to any closed operator
/// system under any permutation of subspaces.
bool exotic_by_diagram(const IntersectionDiagram& d);
bool exotic_by_diagram(const FourSystem& s, const TolerancePolicy& policy);

/// Deterministic DOT output (vertices n1..n4, sorted edge list).
std::string to_dot(const IntersectionDiagram& d);

nlohmann::ordered_json diagram_to_json(const IntersectionDiagram& d);
nlohmann::ordered_json system_report(const FourSystem& s, const TolerancePolicy& policy);

}  // namespace fourspace::systems
