#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "qdtile/rational.hpp"

namespace qdtile::report {

// Reports double as regression fixtures: identical configs must produce
// byte-identical files. Floating values are therefore rendered once, here,
// with 12 significant digits, and carried as strings.
std::string format_double(double v);

// Canonical "p/q".
std::string format_ratio(const linalg::Rational& r);

struct DecayRow {
    int n = 0;
    std::size_t folner_size = 0;
    std::size_t tile_size = 0;
    std::uint64_t index = 0;
    std::string generator;
    linalg::Rational ratio;
    double norm = 0.0;
    double envelope = 0.0;
};

// Header: n,|F|,|K|,index,generator,ratio,norm,envelope
std::string decay_csv(const std::vector<DecayRow>& rows);

// Crossed-run table: one row per (level, test element).
struct CrossedRow {
    int n = 0;
    std::uint64_t index = 0;
    std::string element;
    double defect = 0.0;
    double norm = 0.0;
    double bound = 0.0;
    double orthogonality = 0.0;
    double block_vs_full = 0.0;
};
std::string crossed_csv(const std::vector<CrossedRow>& rows);

} // namespace qdtile::report
