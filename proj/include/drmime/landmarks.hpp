#pragma once

#include <string>
#include <vector>

namespace drmime {

// Corresponding point pair in pixel coordinates of the respective images.
struct LandmarkPair {
    double x_fixed;
    double y_fixed;
    double x_moving;
    double y_moving;
};

using LandmarkSet = std::vector<LandmarkPair>;

// CSV: header "x_fixed,y_fixed,x_moving,y_moving", one pair per row,
// full-precision round trip, LF or CRLF.
LandmarkSet read_landmarks(const std::string& path);
void write_landmarks(const std::string& path, const LandmarkSet& set);

} // namespace drmime
