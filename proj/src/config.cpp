#include "qdtile/config.hpp"

#include <cmath>
#include <fstream>

namespace qdtile::cli {

linalg::Matrix parse_matrix(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a nonempty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j.at(0).size();
    linalg::Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j.at(r).size() != cols) throw ConfigError("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& cell = j.at(r).at(c);
            if (cell.is_number()) {
                m(r, c) = linalg::Complex(cell.get<double>(), 0.0);
            } else if (cell.is_array() && cell.size() == 2) {
                m(r, c) = linalg::Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
            } else {
                throw ConfigError("matrix entries are numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

json matrix_to_json(const linalg::Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

Tolerances parse_tolerances(const json& j) {
    Tolerances t;
    if (j.contains("identity_tol")) t.identity_tol = j.at("identity_tol").get<double>();
    if (j.contains("projection_tol")) t.projection_tol = j.at("projection_tol").get<double>();
    if (j.contains("norm_slack")) t.norm_slack = j.at("norm_slack").get<double>();
    if (j.contains("window_tol")) t.window_tol = j.at("window_tol").get<double>();
    if (j.contains("dense_threshold")) t.norms.dense_threshold = j.at("dense_threshold").get<int>();
    if (j.contains("power_tol")) t.norms.tol = j.at("power_tol").get<double>();
    if (j.contains("index_cap")) t.index_cap = j.at("index_cap").get<std::uint64_t>();
    return t;
}

ActionSpec parse_action(const json& j) {
    ActionSpec a;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "trivial") {
        a.kind = ActionSpec::Kind::Trivial;
    } else if (kind == "bunce_deddens") {
        a.kind = ActionSpec::Kind::BunceDeddens;
        a.subgroup = j.at("subgroup");
    } else if (kind == "rotation") {
        a.kind = ActionSpec::Kind::Rotation;
        const auto& th = j.at("theta");
        if (th.is_string() && th.get<std::string>() == "golden")
            a.theta = (std::sqrt(5.0) - 1.0) / 2.0;
        else
            a.theta = th.get<double>();
    } else if (kind == "inner") {
        a.kind = ActionSpec::Kind::Inner;
        for (const auto& u : j.at("unitaries")) a.unitaries.push_back(u);
    } else {
        throw ConfigError("unknown action kind: " + kind);
    }
    if (j.contains("test_elements"))
        for (const auto& e : j.at("test_elements")) a.test_elements.push_back(e);
    return a;
}

QSpec parse_q(const json& j) {
    QSpec q;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") {
        q.kind = QSpec::Kind::Identity;
    } else if (kind == "tilted") {
        q.kind = QSpec::Kind::Tilted;
        if (j.contains("budget")) q.tilted_budget = j.at("budget").get<double>();
    } else if (kind == "matrix") {
        q.kind = QSpec::Kind::Explicit;
        q.matrix = j.at("value");
    } else {
        throw ConfigError("unknown Q kind: " + kind);
    }
    return q;
}

} // namespace

RunConfig parse_config(const json& j) {
    RunConfig c;
    c.group_descriptor = j.at("group");
    groups::make_group(c.group_descriptor); // validates eagerly

    if (!j.contains("levels") || !j.at("levels").is_array() || j.at("levels").empty())
        throw ConfigError("config needs a nonempty 'levels' array");
    int prev = 0;
    for (const auto& lj : j.at("levels")) {
        LevelSpec l;
        l.n = lj.at("n").get<int>();
        if (l.n < 1) throw ConfigError("level n must be >= 1");
        if (l.n <= prev) throw ConfigError("levels must be strictly increasing in n");
        prev = l.n;
        if (lj.contains("folner_n")) {
            l.box = lj.at("folner_n").get<int>();
            if (l.box < 1) throw ConfigError("folner_n must be >= 1");
        }
        if (lj.contains("subgroup")) l.subgroup = lj.at("subgroup");
        c.levels.push_back(std::move(l));
    }

    if (j.contains("generators"))
        for (const auto& g : j.at("generators"))
            c.generators.push_back(g.get<std::vector<std::int64_t>>());

    if (j.contains("action")) c.action = parse_action(j.at("action"));
    if (j.contains("q_projection")) c.q = parse_q(j.at("q_projection"));
    if (j.contains("tolerances")) c.tol = parse_tolerances(j.at("tolerances"));
    if (j.contains("require_decay")) c.require_decay = j.at("require_decay").get<bool>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (c.threads < 1) c.threads = 1;
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

RunConfig preset_config(const std::string& name) {
    json j;
    j["group"] = {{"kind", "lattice"}, {"rank", 1}};
    if (name == "bd") {
        j["levels"] = json::array();
        for (int n : {2, 4, 8, 16})
            j["levels"].push_back(
                {{"n", n}, {"subgroup", {{"kind", "moduli"}, {"moduli", {2 * n}}}}});
        j["action"] = {{"kind", "bunce_deddens"},
                       {"subgroup", {{"kind", "moduli"}, {"moduli", {2}}}}};
        j["q_projection"] = {{"kind", "identity"}};
        j["require_decay"] = false;
    } else if (name == "rotation") {
        // continued-fraction denominators of the golden mean with matched
        // Folner boxes
        j["levels"] = json::array();
        const std::vector<std::pair<int, int>> qs = {{2, 2}, {2, 3}, {3, 5}, {5, 8}, {7, 13}, {11, 21}};
        int label = 0;
        for (auto [nk, qk] : qs) {
            ++label;
            j["levels"].push_back({{"n", label},
                                   {"folner_n", nk},
                                   {"subgroup", {{"kind", "moduli"}, {"moduli", {qk}}}}});
        }
        j["action"] = {{"kind", "rotation"}, {"theta", "golden"}};
        j["q_projection"] = {{"kind", "identity"}};
        j["require_decay"] = false;
    } else if (name == "pv") {
        j["levels"] = json::array();
        for (int n : {2, 4, 8})
            j["levels"].push_back(
                {{"n", n}, {"subgroup", {{"kind", "moduli"}, {"moduli", {3 * n}}}}});
        j["action"] = {{"kind", "bunce_deddens"},
                       {"subgroup", {{"kind", "moduli"}, {"moduli", {3}}}}};
        j["q_projection"] = {{"kind", "identity"}};
        j["require_decay"] = false;
    } else {
        throw ConfigError("unknown preset: " + name + " (expected bd|rotation|pv)");
    }
    return parse_config(j);
}

} // namespace qdtile::cli
