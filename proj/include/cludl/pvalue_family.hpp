#pragma once

#include <Eigen/Dense>
#include <string>

namespace cludl {

enum class FamilyLevel { Cluster, Covariate };
enum class FamilyKind { Raw, Corrected, Aggregated };

// A vector of p-values tagged with what it refers to (clusters or
// covariates) and how far along the correction pipeline it is.
struct PValueFamily {
    Eigen::VectorXd values;
    FamilyLevel level = FamilyLevel::Cluster;
    FamilyKind kind = FamilyKind::Raw;
    std::string provenance; // bootstrap id or "ensembled"

    PValueFamily() = default;
    PValueFamily(Eigen::VectorXd v, FamilyLevel lv, FamilyKind k,
                 std::string prov = {});

    int size() const { return static_cast<int>(values.size()); }
};

} // namespace cludl
