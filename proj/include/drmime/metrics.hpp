#pragma once

#include <string>
#include <vector>

#include "drmime/image.hpp"
#include "drmime/landmarks.hpp"
#include "drmime/mat3.hpp"

namespace drmime {

struct NaedReport {
    std::vector<double> distances; // unit-square units, one per pair
    double mean = 0.0;
    double stddev = 0.0; // population std of the distances
};

// Maps the fixed-side landmarks through H (fixed -> moving, the same
// convention the warper uses), converts both point sets to the moving
// image's [0,1]x[0,1] coordinates (x/W, y/H), and averages the Euclidean
// distances.
NaedReport naed(const LandmarkSet& landmarks, const Mat3& h, std::size_t fixed_h,
                std::size_t fixed_w, std::size_t moving_h, std::size_t moving_w);

// "pair_index,distance" rows plus a trailing "# mean=... std=... n=..." line.
void write_naed_csv(const std::string& path, const NaedReport& report);

// Mutual information of the joint intensity histogram over [0,1]^2, in
// nats, grayscale inputs of equal dims. Summation is arranged so that
// histogram_mi(P,Q) == histogram_mi(Q,P) bit for bit.
double histogram_mi(const Image& p, const Image& q, std::size_t bins = 100);

// Entropy of the 1D intensity histogram (same binning), in nats.
double histogram_entropy(const Image& p, std::size_t bins = 100);

double image_mse(const Image& p, const Image& q);

// Mean-removed correlation over all pixels and channels, in [-1,1].
double image_ncc(const Image& p, const Image& q);

} // namespace drmime
