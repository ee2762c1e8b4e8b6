// Prices one scarce-inventory season with each policy and reports the
// relative regret against the dynamic-programming optimum.

#include <cstdio>

#include "tsrm/tsrm.hpp"

int main() {
    using namespace tsrm;
    ExperimentConfig cfg = expand_preset("A1");
    cfg.episodes = 200;
    cfg.trials = 4;
    cfg.base_seed = 1;

    const ExperimentResult res = run_trials(cfg, 1);
    std::printf("Rev* = %.4f\n", res.rev_star);
    for (const auto& run : res.runs)
        std::printf("%-18s final relative regret %.4f\n", to_string(run.kind).c_str(), run.curve.mean.back());
}
