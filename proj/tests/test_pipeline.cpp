#include <doctest.h>

#include <sstream>

#include "qdtile/pipeline.hpp"

using namespace qdtile;
using namespace qdtile::cli;

namespace {

json z_lambda_config(std::vector<int> ns, bool require_decay = true) {
    json levels = json::array();
    for (int n : ns)
        levels.push_back({{"n", n}, {"subgroup", {{"kind", "moduli"}, {"moduli", {2 * n - 1}}}}});
    return {{"group", {{"kind", "lattice"}, {"rank", 1}}},
            {"levels", levels},
            {"require_decay", require_decay}};
}

} // namespace

TEST_CASE("tile run: search results, certificates, serializable documents") {
    json j = {{"group", {{"kind", "lattice"}, {"rank", 1}}},
              {"levels", {{{"n", 2}}, {{"n", 4}}, {{"n", 8}}}}};
    RunResult r = run_tile(parse_config(j));
    REQUIRE(r.tiling_documents.size() == 3);
    REQUIRE(r.report.at("levels").size() == 3);
    int i = 0;
    for (int n : {2, 4, 8}) {
        const auto& row = r.report.at("levels").at(i++);
        // the first separating member of the NZ family for box(n) is nZ
        CHECK(row.at("subgroup").at("moduli").at(0).get<int>() == n);
        CHECK(row.at("certificate").at("transversal").get<bool>());
        CHECK(row.at("certificate").at("full_index").get<bool>());
        CHECK(row.at("certificate").at("contains_folner").get<bool>());
        CHECK(row.at("certificate").at("window_checked").get<std::uint64_t>() > 0);
    }

    auto g = groups::make_group(r.report.at("group"));
    tiling::Tiling back = tiling::tiling_from_json(*g, r.tiling_documents[1]);
    CHECK(back.tile.size() == 4);
}

TEST_CASE("tile run on a finite group: K = G, L = {e}") {
    json j = {{"group", {{"kind", "finite_cyclic"}, {"moduli", {12}}}},
              {"levels", {{{"n", 1}}}}};
    RunResult r = run_tile(parse_config(j));
    CHECK(r.report.at("levels").at(0).at("tile_size").get<int>() == 12);
    CHECK(r.report.at("levels").at(0).at("index").get<int>() == 12);
}

TEST_CASE("qd-lambda run over Z: identities, envelopes, decay") {
    RunConfig c = parse_config(z_lambda_config({2, 4, 8, 16, 32}));
    RunResult r = run_qd_lambda(c);
    CHECK(r.report.at("verdict") == "pass");
    for (const auto& level : r.report.at("levels")) {
        CHECK(level.at("phi_identities_exact").get<bool>());
        for (const auto& gen : level.at("generators")) {
            CHECK(std::stod(gen.at("norm").get<std::string>()) <=
                  std::stod(gen.at("envelope").get<std::string>()) + 1e-9);
            CHECK(std::stod(gen.at("window_residual").get<std::string>()) < 1e-12);
        }
    }
    for (const auto& flag : r.report.at("decay")) CHECK(flag.at("halved").get<bool>());

    // CSV: header plus one row per (level, generator); s = -1 mirrors s = +1
    std::istringstream csv(r.decay_table);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "n,|F|,|K|,index,generator,ratio,norm,envelope");
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 10);
}

TEST_CASE("qd-lambda run is deterministic byte for byte") {
    RunConfig c = parse_config(z_lambda_config({2, 4, 8}, false));
    RunResult a = run_qd_lambda(c);
    RunResult b = run_qd_lambda(c);
    CHECK(a.report.dump() == b.report.dump());
    CHECK(a.decay_table == b.decay_table);
}

TEST_CASE("qd-lambda run with threads matches the sequential report") {
    RunConfig c = parse_config(z_lambda_config({2, 4, 8, 16}));
    RunResult seq = run_qd_lambda(c);
    c.threads = 4;
    RunResult par = run_qd_lambda(c);
    CHECK(seq.report.dump() == par.report.dump());
    CHECK(seq.decay_table == par.decay_table);
}

TEST_CASE("qd-crossed runs: presets pass their own gates") {
    for (const char* name : {"bd", "pv", "rotation"}) {
        RunConfig c = preset_config(name);
        RunResult r = run_qd_crossed(c);
        CHECK(r.report.at("verdict") == "pass");
        CHECK(r.report.at("finite_test_family").get<bool>());
        CHECK_FALSE(r.crossed_table.empty());
    }
    // rotation decay indicators are recorded
    RunResult rot = run_qd_crossed(preset_config("rotation"));
    CHECK(rot.report.at("decay").at("defect_strictly_decreasing").get<bool>());
}

TEST_CASE("failing instances exit through CertificationError") {
    // 3Z does not separate box(5): completion must refuse
    json j = {{"group", {{"kind", "lattice"}, {"rank", 1}}},
              {"levels", {{{"n", 5}, {"subgroup", {{"kind", "moduli"}, {"moduli", {3}}}}}}}};
    CHECK_THROWS_AS(run_qd_lambda(parse_config(j)), CertificationError);
}

TEST_CASE("heisenberg qd-lambda level via auto search") {
    json j = {{"group", {{"kind", "heisenberg"}}},
              {"levels", {{{"n", 2}}}},
              {"require_decay", false}};
    RunResult r = run_qd_lambda(parse_config(j));
    const auto& row = r.report.at("levels").at(0);
    CHECK(row.at("subgroup").at("level").get<int>() == 4);
    CHECK(row.at("tile_size").get<int>() == 64);
}
