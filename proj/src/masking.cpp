#include "magvit/masking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace magvit {

double gamma_ratio(const Schedule& schedule, double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("schedule progress must lie in [0,1]");
    switch (schedule.kind) {
        case ScheduleKind::cosine:
            // cos(pi/2) does not round to zero; pin the endpoint so the final
            // decode step selects nothing and the loop terminates.
            if (r == 1.0) return 0.0;
            return std::cos(0.5 * M_PI * r);
        case ScheduleKind::uniform:
            return 1.0 - r;
        case ScheduleKind::exponential: {
            const double floor = std::exp(-schedule.lambda);
            return (std::exp(-schedule.lambda * r) - floor) / (1.0 - floor);
        }
    }
    throw DomainError("invalid schedule kind");
}

Schedule parse_schedule(std::string_view text) {
    Schedule s;
    std::string_view head = text;
    std::string_view tail;
    if (auto comma = text.find(','); comma != std::string_view::npos) {
        head = text.substr(0, comma);
        tail = text.substr(comma + 1);
    }
    if (head == "cosine") s.kind = ScheduleKind::cosine;
    else if (head == "uniform") s.kind = ScheduleKind::uniform;
    else if (head == "exponential") s.kind = ScheduleKind::exponential;
    else
        throw UsageError("unknown schedule \"" + std::string(head) +
                         "\" (expected cosine|uniform|exponential[,lambda=<real>])");
    if (!tail.empty()) {
        constexpr std::string_view prefix = "lambda=";
        if (tail.substr(0, prefix.size()) != prefix)
            throw UsageError("bad schedule option \"" + std::string(tail) + "\"");
        try {
            s.lambda = std::stod(std::string(tail.substr(prefix.size())));
        } catch (const std::exception&) {
            throw UsageError("bad lambda value in schedule \"" + std::string(text) + "\"");
        }
        if (!(s.lambda > 0.0)) throw UsageError("schedule lambda must be positive");
    }
    return s;
}

std::string format_schedule(const Schedule& schedule) {
    switch (schedule.kind) {
        case ScheduleKind::cosine: return "cosine";
        case ScheduleKind::uniform: return "uniform";
        case ScheduleKind::exponential:
            return "exponential,lambda=" + std::to_string(schedule.lambda);
    }
    throw DomainError("invalid schedule kind");
}

double cutoff(std::span<const double> scores, std::size_t k) {
    if (k > scores.size()) throw DomainError("cutoff rank exceeds score count");
    if (k == 0) return -std::numeric_limits<double>::infinity();
    std::vector<double> copy(scores.begin(), scores.end());
    std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end());
    return copy[k - 1];
}

namespace {

std::vector<std::uint8_t> select_by_score(std::span<const double> scores, double cut) {
    std::vector<std::uint8_t> selected(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) selected[i] = scores[i] <= cut ? 1 : 0;
    return selected;
}

} // namespace

CorruptedSequence apply_commit_mask_selected(std::span<const TokenId> z,
                                             const ConditionTokens& cond,
                                             std::span<const std::uint8_t> selected,
                                             TokenId mask_id) {
    const std::size_t n = z.size();
    if (cond.tokens.tokens.size() != n || cond.allpadded.size() != n || selected.size() != n)
        throw DomainError("corruption inputs have mismatched lengths");
    CorruptedSequence out;
    out.tokens.resize(n);
    out.tags.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!selected[i]) {
            out.tokens[i] = z[i];
            out.tags[i] = PositionTag::kTarget;
        } else if (cond.allpadded[i]) {
            out.tokens[i] = mask_id;
            out.tags[i] = PositionTag::kMasked;
        } else {
            out.tokens[i] = cond.tokens.tokens[i];
            out.tags[i] = PositionTag::kCondition;
        }
    }
    return out;
}

CorruptedSequence apply_commit_mask(const TokenLattice& z, const ConditionTokens& cond,
                                    std::span<const double> scores, double cut,
                                    TokenId mask_id) {
    if (scores.size() != z.tokens.size())
        throw DomainError("score vector length does not match token count");
    return apply_commit_mask_selected(z.tokens, cond, select_by_score(scores, cut), mask_id);
}

CorruptedSequence apply_binary_mask_selected(std::span<const TokenId> z,
                                             std::span<const std::uint8_t> selected,
                                             TokenId mask_id) {
    const std::size_t n = z.size();
    if (selected.size() != n) throw DomainError("corruption inputs have mismatched lengths");
    CorruptedSequence out;
    out.tokens.resize(n);
    out.tags.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (selected[i]) {
            out.tokens[i] = mask_id;
            out.tags[i] = PositionTag::kMasked;
        } else {
            out.tokens[i] = z[i];
            out.tags[i] = PositionTag::kTarget;
        }
    }
    return out;
}

CorruptedSequence apply_binary_mask(const TokenLattice& z, std::span<const double> scores,
                                    double cut, TokenId mask_id) {
    if (scores.size() != z.tokens.size())
        throw DomainError("score vector length does not match token count");
    return apply_binary_mask_selected(z.tokens, select_by_score(scores, cut), mask_id);
}

TrainingMask sample_training_mask(std::size_t n, const Schedule& schedule, Rng& rng) {
    if (n == 0) throw DomainError("cannot sample a mask over zero positions");
    TrainingMask out;
    out.ratio_draw = rng.next_unit();
    out.scores.values.resize(n);
    for (double& s : out.scores.values) s = rng.next_unit();
    out.selected_target =
        static_cast<std::size_t>(std::ceil(gamma_ratio(schedule, out.ratio_draw) * n));
    out.cut = cutoff(out.scores.values, out.selected_target);
    return out;
}

} // namespace magvit
