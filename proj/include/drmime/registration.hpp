#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "drmime/image.hpp"
#include "drmime/mine.hpp"
#include "drmime/optimizer.hpp"
#include "drmime/pyramid.hpp"
#include "drmime/sampler.hpp"
#include "drmime/transform_record.hpp"

namespace drmime {

enum class Metric { Mine, Mse, Ncc };
enum class SamplerKind { Canny, Random };

struct RegistrationConfig {
    std::size_t levels = 6;
    std::size_t iterations = 500;
    double lr_theta = 1e-3; // critic weights
    double lr_v = 5e-3;     // shared transform coefficients
    double lr_v1 = 1e-4;    // finest-level correction
    Metric metric = Metric::Mine;
    SamplerKind sampler = SamplerKind::Canny;
    double sample_fraction = 0.1; // random sampler, per level per iteration
    CannyOptions canny;
    std::uint64_t seed = 17;
    bool use_matrix_exp = true; // false: train the 6 matrix entries directly
    bool use_v1 = true;
    AdamConfig adam;
};

struct TracePoint {
    std::size_t iteration = 0;
    double objective = 0.0;
    double wall_ms = 0.0; // elapsed when the iteration finished
};

struct RegistrationResult {
    TransformRecord record;
    std::vector<TracePoint> trace;
    double final_objective = 0.0; // one extra evaluation after the last update
    double wall_seconds = 0.0;
    std::size_t iterations_run = 0;
    std::size_t levels_used = 0;
};

// Draws the marginal-shuffling permutation for one level's batch; called
// in ascending level order for exactly the levels that enter the sum.
using PermProvider = std::function<std::vector<std::size_t>(std::size_t level, std::size_t n)>;

// The multi-level objective: term(level 1 with h1) + sum over levels >= 2
// with h. Out-of-bounds warped samples are dropped pairwise; a level with
// fewer than 2 valid samples is skipped with a warning; if every level is
// skipped the images do not overlap and a NumericalError is thrown.
// metric=mine sums DV bounds (net required); mse contributes -MSE per
// level and ncc the normalized correlation per level (equal channel
// counts required for both).
ad::Var objective(ad::Tape& tape, const Pyramid& fixed,
                  const std::vector<std::shared_ptr<const ad::Tensor>>& moving_grids,
                  const std::vector<SampleSet>& samples, Metric metric, ad::Var h, ad::Var h1,
                  const MineVars* net, const PermProvider& perms,
                  std::size_t* levels_used = nullptr);

// The full driver: builds both pyramids, initializes the critic (seeded)
// and v = v1 = 0, and runs `iterations` simultaneous-ascent steps on
// (theta, v, v1) with the three learning rates. Requested levels are
// clamped so the coarsest level stays at least 8x8 on both images.
RegistrationResult register_images(const Image& fixed, const Image& moving,
                                   const RegistrationConfig& cfg);

// CSV: "iteration,objective,wall_ms" rows.
void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace);

} // namespace drmime
