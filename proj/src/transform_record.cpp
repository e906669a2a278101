#include "drmime/transform_record.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "drmime/errors.hpp"

namespace drmime {

namespace {

using nlohmann::json;

double consistency_gap(const TransformRecord& rec) {
    LieParams p;
    p.v = rec.v;
    p.v1 = rec.v1;
    return rec.matrix.max_abs_diff(compose_params(p, 1));
}

void check_record(const TransformRecord& rec, double tol, const char* context) {
    if (rec.coord_space != "normalized")
        throw InvalidArgument(std::string(context) + ": coord_space must be 'normalized'");
    if (rec.parameterization != "mexp" && rec.parameterization != "direct")
        throw InvalidArgument(std::string(context) + ": unknown parameterization");
    if (!rec.matrix.affine_row())
        throw InvalidArgument(std::string(context) + ": bottom row must be (0,0,1)");
    for (double x : rec.matrix.m)
        if (!std::isfinite(x)) throw NumericalError(std::string(context) + ": non-finite matrix");
    if (rec.parameterization == "mexp" && consistency_gap(rec) > tol)
        throw InvalidArgument(std::string(context) +
                              ": matrix inconsistent with its Lie coefficients");
}

} // namespace

TransformRecord make_record(const LieParams& p, std::size_t fixed_h, std::size_t fixed_w,
                            std::size_t moving_h, std::size_t moving_w) {
    TransformRecord rec;
    rec.matrix = compose_params(p, 1);
    rec.v = p.v;
    rec.v1 = p.v1;
    rec.fixed_h = fixed_h;
    rec.fixed_w = fixed_w;
    rec.moving_h = moving_h;
    rec.moving_w = moving_w;
    return rec;
}

TransformRecord make_direct_record(const Mat3& h, std::size_t fixed_h, std::size_t fixed_w,
                                   std::size_t moving_h, std::size_t moving_w) {
    TransformRecord rec;
    rec.matrix = h;
    rec.parameterization = "direct";
    rec.fixed_h = fixed_h;
    rec.fixed_w = fixed_w;
    rec.moving_h = moving_h;
    rec.moving_w = moving_w;
    return rec;
}

void write_transform(const std::string& path, const TransformRecord& rec) {
    check_record(rec, 1e-12, "write_transform");
    json j;
    j["matrix"] = {
        {rec.matrix.at(0, 0), rec.matrix.at(0, 1), rec.matrix.at(0, 2)},
        {rec.matrix.at(1, 0), rec.matrix.at(1, 1), rec.matrix.at(1, 2)},
        {rec.matrix.at(2, 0), rec.matrix.at(2, 1), rec.matrix.at(2, 2)},
    };
    j["v"] = rec.v;
    j["v1"] = rec.v1;
    j["coord_space"] = rec.coord_space;
    j["fixed_size"] = {rec.fixed_h, rec.fixed_w};
    j["moving_size"] = {rec.moving_h, rec.moving_w};
    j["parameterization"] = rec.parameterization;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write transform: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

TransformRecord read_transform(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transform: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("malformed transform JSON: " + path + " (" + e.what() + ")");
    }

    TransformRecord rec;
    try {
        const auto& m = j.at("matrix");
        if (m.size() != 3) throw IoError("matrix must be 3x3");
        for (std::size_t r = 0; r < 3; ++r) {
            if (m[r].size() != 3) throw IoError("matrix must be 3x3");
            for (std::size_t c = 0; c < 3; ++c) rec.matrix.at(r, c) = m[r][c].get<double>();
        }
        const auto& v = j.at("v");
        const auto& v1 = j.at("v1");
        if (v.size() != 6 || v1.size() != 6) throw IoError("v/v1 must have 6 entries");
        for (std::size_t i = 0; i < 6; ++i) {
            rec.v[i] = v[i].get<double>();
            rec.v1[i] = v1[i].get<double>();
        }
        rec.coord_space = j.at("coord_space").get<std::string>();
        const auto& fs = j.at("fixed_size");
        const auto& ms = j.at("moving_size");
        if (fs.size() != 2 || ms.size() != 2) throw IoError("sizes must be [H,W]");
        rec.fixed_h = fs[0].get<std::size_t>();
        rec.fixed_w = fs[1].get<std::size_t>();
        rec.moving_h = ms[0].get<std::size_t>();
        rec.moving_w = ms[1].get<std::size_t>();
        rec.parameterization = j.value("parameterization", std::string("mexp"));
    } catch (const json::exception& e) {
        throw IoError("transform record missing/invalid field: " + path + " (" + e.what() + ")");
    }

    try {
        check_record(rec, 1e-9, "read_transform");
    } catch (const Error& e) {
        throw IoError(std::string(e.what()) + ": " + path);
    }
    return rec;
}

} // namespace drmime
