#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "magvit/rng.hpp"
#include "magvit/tokenizer.hpp"

namespace magvit {

enum class ScheduleKind { cosine, uniform, exponential };

// Mask-ratio schedule gamma: [0,1] -> [0,1], gamma(0) = 1, gamma(1) = 0,
// monotone non-increasing.
struct Schedule {
    ScheduleKind kind = ScheduleKind::cosine;
    double lambda = 3.0;  // exponential decay rate
};

double gamma_ratio(const Schedule& schedule, double r);

// Config grammar: cosine | uniform | exponential[,lambda=<real>]
Schedule parse_schedule(std::string_view text);
std::string format_schedule(const Schedule& schedule);

struct MaskScores {
    std::vector<double> values;
    std::uint64_t seed = 0;
};

// k-th smallest score (1-indexed). k = 0 returns -infinity, selecting nothing.
// Selection is by value: every position with score <= the returned cut-off is
// selected, so tied scores share their fate.
double cutoff(std::span<const double> scores, std::size_t k);

enum class PositionTag : std::uint8_t {
    kCondition,  // carries the condition token
    kMasked,     // replaced by [MASK]
    kTarget,     // carries the target token untouched
};

// Token sequence after corruption. tokens[i] is the condition token, the mask
// id, or the target token according to tags[i].
struct CorruptedSequence {
    std::vector<TokenId> tokens;
    std::vector<PositionTag> tags;

    std::size_t size() const { return tokens.size(); }
};

// Multivariate conditional mask: a selected position takes the condition
// token where its supervoxel holds any condition pixels, and [MASK] where it
// is all padding; unselected positions keep the target token.
CorruptedSequence apply_commit_mask(const TokenLattice& z, const ConditionTokens& cond,
                                    std::span<const double> scores, double cut,
                                    TokenId mask_id);

// Same, with the selected set given explicitly (the decoder excludes frozen
// positions from selection regardless of their score).
CorruptedSequence apply_commit_mask_selected(std::span<const TokenId> z,
                                             const ConditionTokens& cond,
                                             std::span<const std::uint8_t> selected,
                                             TokenId mask_id);

// Binary mask: every selected position becomes [MASK].
CorruptedSequence apply_binary_mask(const TokenLattice& z, std::span<const double> scores,
                                    double cut, TokenId mask_id);

CorruptedSequence apply_binary_mask_selected(std::span<const TokenId> z,
                                             std::span<const std::uint8_t> selected,
                                             TokenId mask_id);

struct TrainingMask {
    MaskScores scores;
    double cut = 0.0;
    double ratio_draw = 0.0;  // the sampled r
    std::size_t selected_target = 0;  // ceil(gamma(r) * N)
};

// Samples r ~ U(0,1), iid uniform scores, and the cut-off at the
// ceil(gamma(r)*N)-th smallest score. gamma(r) > 0 for r < 1, so at least one
// position is always selected during training.
TrainingMask sample_training_mask(std::size_t n, const Schedule& schedule, Rng& rng);

} // namespace magvit
