#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "qdtile/config.hpp"
#include "qdtile/crossed.hpp"
#include "qdtile/projection.hpp"
#include "qdtile/report.hpp"

namespace qdtile::cli {

using ordered_json = nlohmann::ordered_json;

// One fully built level: Folner set, certified tiling, exact phi table and
// the projection family on the F^{-1}K window.
struct LambdaLevel {
    int n = 0;
    int box = 0;
    qd::ProjectionFamily proj;

    const tiling::FolnerSet& folner() const { return proj.phi().folner(); }
    const tiling::Tiling& tiling() const { return proj.phi().tiling(); }
};

LambdaLevel build_level(const groups::Group& g, const LevelSpec& spec, const Tolerances& tol);

// The generator list used for translation tests: config override or the
// descriptor generators closed under inverses.
std::vector<groups::GroupElement> test_translations(const groups::Group& g, const RunConfig& c);

struct RunResult {
    ordered_json report;
    std::string decay_table;   // qd-lambda CSV
    std::string crossed_table; // qd-crossed CSV
    std::vector<nlohmann::json> tiling_documents;
};

RunResult run_tile(const RunConfig& c);
RunResult run_qd_lambda(const RunConfig& c);
RunResult run_qd_crossed(const RunConfig& c);

// Action instance and per-level Q from the config.
crossed::ActionInstance build_action(const groups::Group& g, const RunConfig& c);
linalg::Matrix build_q(const QSpec& q, Eigen::Index dim, int level_n);

} // namespace qdtile::cli
