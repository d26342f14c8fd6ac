#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdtile/action.hpp"
#include "qdtile/group.hpp"
#include "qdtile/linalg.hpp"

namespace qdtile::cli {

using nlohmann::json;

struct Tolerances {
    double identity_tol = 1e-12;   // exact-law residuals (Gram, covariance)
    double projection_tol = 1e-10; // ||P^2 - P||, block identities
    double norm_slack = 1e-9;      // norm inequality slack
    double window_tol = 1e-12;     // window-exactness residual
    linalg::NormOptions norms;     // dense/gram thresholds, power tolerance
    std::uint64_t index_cap = 100000;
};

struct LevelSpec {
    int n = 1;                    // level label, strictly increasing
    int box = 0;                  // Folner box parameter; 0 means "use n"
    std::optional<json> subgroup; // absent: separating-family search

    int box_param() const { return box > 0 ? box : n; }
};

struct QSpec {
    enum class Kind { Identity, Tilted, Explicit };
    Kind kind = Kind::Identity;
    double tilted_budget = 1.0;     // commutator target = min(1, budget / n)
    std::optional<json> matrix;     // Kind::Explicit
};

struct ActionSpec {
    enum class Kind { Trivial, BunceDeddens, Rotation, Inner };
    Kind kind = Kind::Trivial;
    std::optional<json> subgroup;   // BunceDeddens: L_m parameters
    double theta = 0.0;             // Rotation
    std::vector<json> unitaries;    // Inner: one matrix per generator
    std::vector<json> test_elements; // optional override, matrices per block
};

struct RunConfig {
    json group_descriptor;
    std::vector<LevelSpec> levels;
    std::vector<std::vector<std::int64_t>> generators; // empty: group generators +/-
    std::optional<ActionSpec> action;
    QSpec q;
    Tolerances tol;
    bool require_decay = true;
    int threads = 1;
};

RunConfig parse_config(const json& j);
RunConfig load_config_file(const std::string& path);

// Built-in crossed-product presets.
//  bd:       G = Z, A = C(Z/2), translation, L_n = 2nZ, Q = I
//  rotation: G = Z, A = M_2, golden-mean inner rotation, L_k = q_k Z
//  pv:       G = Z, A = C(Z/3), translation, L_n = 3nZ (periodic case)
RunConfig preset_config(const std::string& name);

linalg::Matrix parse_matrix(const json& j);
json matrix_to_json(const linalg::Matrix& m);

} // namespace qdtile::cli
