#include "magvit/decode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace magvit {

namespace {

constexpr std::uint64_t kSampleStream = 0x73616d70ull;
constexpr std::uint64_t kNoiseStream = 0x6e6f6973ull;

// Categorical draw from one grid row; u in [0,1).
TokenId sample_row(std::span<const double> row, double u) {
    double acc = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        acc += row[j];
        if (u < acc) return static_cast<TokenId>(j);
    }
    return static_cast<TokenId>(row.size() - 1);
}

struct LoopMode {
    bool latent_masking = false;
};

DecodeResult iterative_decode(const Predictor& pred, TaskId prompt,
                              const std::optional<ClassLabel>& label,
                              const ConditionTokens& cond, const LatentDims& latent,
                              const DecodeConfig& cfg, LoopMode mode) {
    const std::size_t n = latent.count();
    if (cond.tokens.tokens.size() != n || cond.allpadded.size() != n)
        throw DomainError("condition tokens do not match the lattice");
    if (cfg.steps < 1) throw ConfigError("decode steps must be at least 1");
    if (cfg.temperature < 0.0) throw ConfigError("decode temperature must be non-negative");

    const TokenId mask_id = pred.vocab().mask_id();
    const Rng base(hash_combine(cfg.seed, 0x6465636full));

    DecodeState state;
    state.scores.assign(n, 0.0);
    state.prediction.assign(n, 0);
    state.s_star = 1.0;

    if (mode.latent_masking) {
        // Pin condition positions before the loop: token fixed, score 1.
        for (std::size_t i = 0; i < n; ++i)
            if (!cond.allpadded[i]) {
                state.prediction[i] = cond.tokens.tokens[i];
                state.scores[i] = 1.0;
            }
    }

    std::vector<double>& scores = state.scores;
    std::vector<TokenId>& zhat = state.prediction;
    auto is_frozen = [&](std::size_t i) { return state.frozen(i); };

    DecodeResult result;
    result.trace.steps.reserve(cfg.steps);

    for (int t = 0; t < cfg.steps; ++t) {
        // Active set: at or below the running cut-off and not frozen.
        std::vector<std::uint8_t> selected(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            selected[i] = (scores[i] <= state.s_star && !is_frozen(i)) ? 1 : 0;

        const CorruptedSequence corrupted =
            mode.latent_masking
                ? apply_binary_mask_selected(zhat, selected, mask_id)
                : apply_commit_mask_selected(zhat, cond, selected, mask_id);

        const PredictionGrid grid = pred.predict(prompt, label, corrupted, latent);

        for (std::size_t i = 0; i < n; ++i) {
            if (!selected[i]) continue;
            Rng rng = base.split(kSampleStream, hash_combine(t, i));
            const TokenId pick = sample_row(grid.row(i), rng.next_unit());
            zhat[i] = pick;
            scores[i] = grid.row(i)[pick];
        }

        const double anneal =
            cfg.temperature * (1.0 - static_cast<double>(t + 1) / cfg.steps);
        if (anneal > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                if (scores[i] >= 1.0) continue;  // frozen scores stay exact
                Rng rng = base.split(kNoiseStream, hash_combine(t, i));
                scores[i] += anneal * gumbel_sample(rng);
            }
        }

        const std::size_t k = static_cast<std::size_t>(
            std::ceil(gamma_ratio(cfg.schedule, static_cast<double>(t + 1) / cfg.steps) *
                      static_cast<double>(n)));
        state.s_star = cutoff(scores, k);

        std::size_t newly_frozen = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_frozen(i)) continue;
            if (scores[i] > state.s_star) {
                scores[i] = 1.0;
                ++newly_frozen;
            }
        }

        DecodeStepRecord rec;
        rec.step = t;
        rec.s_star = state.s_star;
        rec.newly_frozen = newly_frozen;
        rec.tokens = zhat;
        rec.frozen.resize(n);
        std::size_t active = 0;
        for (std::size_t i = 0; i < n; ++i) {
            rec.frozen[i] = is_frozen(i) ? 1 : 0;
            if (!rec.frozen[i] && scores[i] <= state.s_star) ++active;
        }
        rec.selected = active;
        result.trace.steps.push_back(std::move(rec));
    }

    result.tokens.latent = latent;
    result.tokens.tokens = std::move(zhat);
    return result;
}

} // namespace

double gumbel_from_unit(double u) {
    constexpr double eps = 1e-12;
    u = std::clamp(u, eps, 1.0 - eps);
    return -std::log(-std::log(u));
}

double gumbel_sample(Rng& rng) {
    return gumbel_from_unit(rng.next_unit());
}

DecodeResult commit_decode(const Predictor& pred, TaskId prompt,
                           const std::optional<ClassLabel>& label,
                           const ConditionTokens& cond, const LatentDims& latent,
                           const DecodeConfig& cfg) {
    return iterative_decode(pred, prompt, label, cond, latent, cfg, {.latent_masking = false});
}

DecodeResult latent_masking_decode(const Predictor& pred, TaskId prompt,
                                   const std::optional<ClassLabel>& label,
                                   const ConditionTokens& cond, const LatentDims& latent,
                                   const DecodeConfig& cfg) {
    return iterative_decode(pred, prompt, label, cond, latent, cfg, {.latent_masking = true});
}

ArResult ar_decode(const Predictor& pred, TaskId prompt,
                   const std::optional<ClassLabel>& label, const ConditionTokens& cond,
                   const LatentDims& latent, std::uint64_t seed) {
    const std::size_t n = latent.count();
    if (cond.tokens.tokens.size() != n || cond.allpadded.size() != n)
        throw DomainError("condition tokens do not match the lattice");

    const TokenId mask_id = pred.vocab().mask_id();
    const Rng base(hash_combine(seed, 0x6172ull));

    // Undecoded suffix stays as the commit-style corruption.
    CorruptedSequence corrupted;
    corrupted.tokens.resize(n);
    corrupted.tags.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (cond.allpadded[i]) {
            corrupted.tokens[i] = mask_id;
            corrupted.tags[i] = PositionTag::kMasked;
        } else {
            corrupted.tokens[i] = cond.tokens.tokens[i];
            corrupted.tags[i] = PositionTag::kCondition;
        }
    }

    ArResult result;
    result.tokens.latent = latent;
    result.tokens.tokens.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PredictionGrid grid = pred.predict(prompt, label, corrupted, latent);
        Rng rng = base.split(kSampleStream, i);
        const TokenId pick = sample_row(grid.row(i), rng.next_unit());
        result.tokens.tokens[i] = pick;
        corrupted.tokens[i] = pick;
        corrupted.tags[i] = PositionTag::kTarget;
    }
    result.step_count = n;
    return result;
}

CostReport cost_report(std::size_t seq_len, std::size_t nar_steps, std::size_t ar_steps) {
    if (seq_len == 0 || nar_steps == 0 || ar_steps == 0)
        throw DomainError("cost_report inputs must be positive");
    CostReport r;
    r.seq_len = seq_len;
    r.nar_steps = nar_steps;
    r.ar_steps = ar_steps;
    r.per_step_cost = static_cast<double>(seq_len) * static_cast<double>(seq_len);
    r.nar_total = r.per_step_cost * static_cast<double>(nar_steps);
    r.ar_total = r.per_step_cost * static_cast<double>(ar_steps);
    r.step_ratio = static_cast<double>(ar_steps) / static_cast<double>(nar_steps);
    r.total_ratio = r.ar_total / r.nar_total;
    return r;
}

std::string format_trace(const DecodeTrace& trace) {
    std::ostringstream os;
    os.precision(9);
    for (const DecodeStepRecord& rec : trace.steps)
        os << "step," << rec.step << " s*," << rec.s_star << " selected," << rec.selected
           << " frozen," << rec.newly_frozen << "\n";
    return os.str();
}

void save_trace(const DecodeTrace& trace, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open trace file for writing: " + path.string());
    os << format_trace(trace);
    if (!os) throw IoError("failed writing trace file: " + path.string());
}

} // namespace magvit
