#include "qdtile/report.hpp"

#include <cstdio>

namespace qdtile::report {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format_ratio(const linalg::Rational& r) { return linalg::fraction_string(r); }

std::string decay_csv(const std::vector<DecayRow>& rows) {
    std::string out = "n,|F|,|K|,index,generator,ratio,norm,envelope\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.folner_size) + "," +
               std::to_string(r.tile_size) + "," + std::to_string(r.index) + "," + r.generator +
               "," + format_ratio(r.ratio) + "," + format_double(r.norm) + "," +
               format_double(r.envelope) + "\n";
    }
    return out;
}

std::string crossed_csv(const std::vector<CrossedRow>& rows) {
    std::string out = "n,index,element,defect,norm,bound,orthogonality,block_vs_full\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.index) + "," + r.element + "," +
               format_double(r.defect) + "," + format_double(r.norm) + "," +
               format_double(r.bound) + "," + format_double(r.orthogonality) + "," +
               format_double(r.block_vs_full) + "\n";
    }
    return out;
}

} // namespace qdtile::report
