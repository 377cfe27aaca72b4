#pragma once

#include <cstdint>
#include <string>

namespace splatgrad {

struct GradcheckOptions {
    std::uint64_t seed = 0;
    int instances = 20;
};

struct GradcheckReport {
    std::string text;  // deterministic for a fixed seed (no timing included)
    bool all_passed = false;
    int failures = 0;
};

/// Central finite-difference audit of every pullback: convolution, projection,
/// splatting, the visual-map chain, the Chamfer gradient and the full
/// total_loss gradient. Kink-prone checks retry on jittered inputs.
GradcheckReport run_gradcheck(const GradcheckOptions& opts);

}  // namespace splatgrad
