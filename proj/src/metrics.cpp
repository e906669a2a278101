#include "drmime/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "drmime/coords.hpp"
#include "drmime/errors.hpp"

namespace drmime {

NaedReport naed(const LandmarkSet& landmarks, const Mat3& h, std::size_t fixed_h,
                std::size_t fixed_w, std::size_t moving_h, std::size_t moving_w) {
    if (landmarks.empty()) throw InvalidArgument("naed: empty landmark set");
    if (!h.affine_row()) throw InvalidArgument("naed: bottom row must be (0,0,1)");
    NaedReport rep;
    rep.distances.reserve(landmarks.size());
    double sum = 0.0;
    for (const LandmarkPair& lm : landmarks) {
        const double xn = norm_from_px(lm.x_fixed, fixed_w);
        const double yn = norm_from_px(lm.y_fixed, fixed_h);
        double tx = 0.0, ty = 0.0;
        h.apply(xn, yn, tx, ty);
        const double xp = px_from_norm(tx, moving_w);
        const double yp = px_from_norm(ty, moving_h);
        const double du = (xp - lm.x_moving) / static_cast<double>(moving_w);
        const double dv = (yp - lm.y_moving) / static_cast<double>(moving_h);
        const double d = std::hypot(du, dv);
        rep.distances.push_back(d);
        sum += d;
    }
    rep.mean = sum / static_cast<double>(rep.distances.size());
    double var = 0.0;
    for (double d : rep.distances) var += (d - rep.mean) * (d - rep.mean);
    rep.stddev = std::sqrt(var / static_cast<double>(rep.distances.size()));
    return rep;
}

void write_naed_csv(const std::string& path, const NaedReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write NAED report: " + path);
    out << "pair_index,distance\n";
    char buf[80];
    for (std::size_t i = 0; i < report.distances.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, report.distances[i]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "# mean=%.17g std=%.17g n=%zu\n", report.mean, report.stddev,
                  report.distances.size());
    out << buf;
    if (!out) throw IoError("write failed: " + path);
}

namespace {

std::size_t bin_of(double v, std::size_t bins) {
    const std::size_t b = static_cast<std::size_t>(v * static_cast<double>(bins));
    return b >= bins ? bins - 1 : b;
}

void check_same_dims(const Image& p, const Image& q, const char* who) {
    if (p.height() != q.height() || p.width() != q.width())
        throw InvalidArgument(std::string(who) + ": image dims differ");
}

} // namespace

double histogram_mi(const Image& p, const Image& q, std::size_t bins) {
    if (bins < 2) throw InvalidArgument("histogram_mi: need at least 2 bins");
    if (p.channels() != 1 || q.channels() != 1)
        throw InvalidArgument("histogram_mi: grayscale images required");
    check_same_dims(p, q, "histogram_mi");

    const std::size_t n = p.pixel_count();
    std::vector<double> joint(bins * bins, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        joint[bin_of(p.data()[i], bins) * bins + bin_of(q.data()[i], bins)] += 1.0;
    const double inv = 1.0 / static_cast<double>(n);
    for (double& v : joint) v *= inv;

    std::vector<double> px(bins, 0.0), py(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i)
        for (std::size_t j = 0; j < bins; ++j) px[i] += joint[i * bins + j];
    for (std::size_t j = 0; j < bins; ++j)
        for (std::size_t i = 0; i < bins; ++i) py[j] += joint[i * bins + j];

    // The (i,j)/(j,i) terms are added as a pair so that swapping the images
    // only swaps commutative operands and the result is bitwise symmetric.
    const auto term = [&](std::size_t i, std::size_t j) {
        const double pij = joint[i * bins + j];
        if (pij == 0.0) return 0.0;
        return pij * (std::log(pij) - (std::log(px[i]) + std::log(py[j])));
    };
    double mi = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        mi += term(i, i);
        for (std::size_t j = i + 1; j < bins; ++j) mi += term(i, j) + term(j, i);
    }
    return mi;
}

double histogram_entropy(const Image& p, std::size_t bins) {
    if (bins < 2) throw InvalidArgument("histogram_entropy: need at least 2 bins");
    if (p.channels() != 1) throw InvalidArgument("histogram_entropy: grayscale image required");
    std::vector<double> hist(bins, 0.0);
    for (double v : p.data()) hist[bin_of(v, bins)] += 1.0;
    const double inv = 1.0 / static_cast<double>(p.pixel_count());
    double h = 0.0;
    for (double c : hist) {
        const double pr = c * inv;
        if (pr > 0.0) h += pr * std::log(pr);
    }
    return -h;
}

double image_mse(const Image& p, const Image& q) {
    check_same_dims(p, q, "image_mse");
    if (p.channels() != q.channels()) throw InvalidArgument("image_mse: channel counts differ");
    double s = 0.0;
    for (std::size_t i = 0; i < p.data().size(); ++i) {
        const double d = p.data()[i] - q.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(p.data().size());
}

double image_ncc(const Image& p, const Image& q) {
    check_same_dims(p, q, "image_ncc");
    if (p.channels() != q.channels()) throw InvalidArgument("image_ncc: channel counts differ");
    const std::size_t n = p.data().size();
    double mp = 0.0, mq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += p.data()[i];
        mq += q.data()[i];
    }
    mp /= static_cast<double>(n);
    mq /= static_cast<double>(n);
    double num = 0.0, vp = 0.0, vq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = p.data()[i] - mp;
        const double b = q.data()[i] - mq;
        num += a * b;
        vp += a * a;
        vq += b * b;
    }
    if (vp <= 0.0 || vq <= 0.0) throw NumericalError("image_ncc: zero-variance image");
    return num / std::sqrt(vp * vq);
}

} // namespace drmime
