#pragma once

#include <string>

#include "drmime/image.hpp"

namespace drmime {

// Binary PGM (P5) and PPM (P6), maxval 255 or 65535. Values map to [0,1]
// by /maxval. Format picked by magic number on load, by extension on save
// (.pgm needs C=1, .ppm needs C=3); saving always writes 8-bit.
Image load_image(const std::string& path);
void save_image(const std::string& path, const Image& img);

} // namespace drmime
