#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "magvit/model.hpp"

namespace magvit {

struct DecodeConfig {
    int steps = 12;            // K
    double temperature = 4.5;  // scales the Gumbel noise on confidence scores
    Schedule schedule;         // cosine by default
    std::uint64_t seed = 0;
};

// Mutable state of one decoding run. A position is frozen exactly when its
// score is 1; frozen positions are never re-masked or re-sampled, and after
// the final step every position is frozen.
struct DecodeState {
    std::vector<double> scores;      // s, length N
    double s_star = 1.0;             // running cut-off
    std::vector<TokenId> prediction; // z-hat, length N

    bool frozen(std::size_t i) const { return scores[i] == 1.0; }
};

// Per-step record. s_star and selected describe the state after the step's
// threshold update: selected counts the positions left active for the next
// step and tracks ceil(gamma((t+1)/K) * N).
struct DecodeStepRecord {
    int step = 0;
    double s_star = 0.0;
    std::size_t selected = 0;
    std::size_t newly_frozen = 0;
    std::vector<TokenId> tokens;        // snapshot of the prediction
    std::vector<std::uint8_t> frozen;   // snapshot of the frozen flags
};

struct DecodeTrace {
    std::vector<DecodeStepRecord> steps;
};

struct DecodeResult {
    TokenLattice tokens;
    DecodeTrace trace;
};

// Standard Gumbel(0,1) via -log(-log(U)); U is clamped away from {0,1}.
double gumbel_from_unit(double u);
double gumbel_sample(Rng& rng);

// Non-autoregressive conditional decoding: start from the full multivariate
// mask, and per step sample every active position, score it by the
// probability of its sample, add annealed Gumbel noise, and freeze everything
// above the new cut-off. Frozen positions (score exactly 1) are never
// re-masked or re-sampled. The final step's cut-off rank is 0, so the loop
// always terminates with every position frozen.
DecodeResult commit_decode(const Predictor& pred, TaskId prompt,
                           const std::optional<ClassLabel>& label,
                           const ConditionTokens& cond, const LatentDims& latent,
                           const DecodeConfig& cfg);

// Baseline: positions whose supervoxel holds condition pixels are pinned to
// the condition token and frozen before the first step; the rest run the
// plain binary-mask loop. Condition tokens are never refined.
DecodeResult latent_masking_decode(const Predictor& pred, TaskId prompt,
                                   const std::optional<ClassLabel>& label,
                                   const ConditionTokens& cond, const LatentDims& latent,
                                   const DecodeConfig& cfg);

struct ArResult {
    TokenLattice tokens;
    std::size_t step_count = 0;  // always N
};

// Autoregressive baseline: raster order, one position per step. Positions not
// yet decoded appear as the commit-style corruption (condition token or
// [MASK]).
ArResult ar_decode(const Predictor& pred, TaskId prompt,
                   const std::optional<ClassLabel>& label, const ConditionTokens& cond,
                   const LatentDims& latent, std::uint64_t seed);

// Step/cost model with a quadratic (attention-proxy) per-step cost of N^2
// units. Ratios are normalized to the NAR row.
struct CostReport {
    std::size_t seq_len = 0;
    std::size_t nar_steps = 0;
    std::size_t ar_steps = 0;
    double per_step_cost = 0.0;  // N^2
    double nar_total = 0.0;
    double ar_total = 0.0;
    double step_ratio = 0.0;   // ar_steps / nar_steps
    double total_ratio = 0.0;  // ar_total / nar_total
};

CostReport cost_report(std::size_t seq_len, std::size_t nar_steps, std::size_t ar_steps);

// Line-delimited export: `step,<int> s*,<real> selected,<int> frozen,<int>`.
std::string format_trace(const DecodeTrace& trace);
void save_trace(const DecodeTrace& trace, const std::filesystem::path& path);

} // namespace magvit
