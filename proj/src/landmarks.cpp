#include "drmime/landmarks.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "drmime/errors.hpp"

namespace drmime {

namespace {

const char* kHeader = "x_fixed,y_fixed,x_moving,y_moving";

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace

LandmarkSet read_landmarks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open landmarks: " + path);

    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kHeader)
        throw IoError("landmarks missing header '" + std::string(kHeader) + "': " + path);

    LandmarkSet set;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        std::istringstream row(line);
        LandmarkPair p{};
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(row >> p.x_fixed >> c1 >> p.y_fixed >> c2 >> p.x_moving >> c3 >> p.y_moving) ||
            c1 != ',' || c2 != ',' || c3 != ',')
            throw IoError("malformed landmark row at line " + std::to_string(lineno) + ": " + path);
        std::string rest;
        if (row >> rest)
            throw IoError("trailing data in landmark row at line " + std::to_string(lineno) + ": " +
                          path);
        set.push_back(p);
    }
    if (set.empty()) throw IoError("no landmarks: " + path);
    return set;
}

void write_landmarks(const std::string& path, const LandmarkSet& set) {
    if (set.empty()) throw InvalidArgument("write_landmarks: empty set");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write landmarks: " + path);
    out << kHeader << "\n";
    char buf[160];
    for (const LandmarkPair& p : set) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", p.x_fixed, p.y_fixed,
                      p.x_moving, p.y_moving);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace drmime
