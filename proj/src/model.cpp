#include "magvit/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "magvit/binio.hpp"
#include "magvit/kernels.hpp"

namespace magvit {

Vocabulary::Vocabulary(std::size_t codebook_size, std::size_t num_classes)
    : codebook_size_(codebook_size), num_classes_(num_classes) {
    if (codebook_size < 2) throw ConfigError("vocabulary needs a codebook of at least 2");
}

TokenId Vocabulary::prompt_id(TaskId task) const {
    return static_cast<TokenId>(codebook_size_ + 1 + static_cast<std::size_t>(task));
}

TokenId Vocabulary::class_id(const ClassLabel& label) const {
    if (label.id < 0 || static_cast<std::size_t>(label.id) >= num_classes_)
        throw ConfigError("class label out of range for vocabulary");
    return static_cast<TokenId>(codebook_size_ + 11 + label.id);
}

TokenId Vocabulary::prefix_class_id(const std::optional<ClassLabel>& label) const {
    return label ? class_id(*label) : null_class_id();
}

LossVariant parse_loss_variant(std::string_view text) {
    if (text == "mask") return LossVariant::mask_only;
    if (text == "mask+recons") return LossVariant::mask_recons;
    if (text == "full" || text == "mask+recons+refine") return LossVariant::full;
    throw UsageError("unknown loss variant \"" + std::string(text) +
                     "\" (expected mask|mask+recons|full)");
}

std::string_view loss_variant_name(LossVariant v) {
    switch (v) {
        case LossVariant::mask_only: return "mask";
        case LossVariant::mask_recons: return "mask+recons";
        case LossVariant::full: return "full";
    }
    throw DomainError("invalid loss variant");
}

bool tag_in_variant(PositionTag tag, LossVariant variant) {
    switch (tag) {
        case PositionTag::kMasked: return true;
        case PositionTag::kTarget: return variant != LossVariant::mask_only;
        case PositionTag::kCondition: return variant == LossVariant::full;
    }
    throw DomainError("invalid position tag");
}

OraclePredictor::OraclePredictor(TokenLattice truth, Vocabulary vocab)
    : truth_(std::move(truth)), vocab_(vocab) {
    for (TokenId id : truth_.tokens)
        if (id >= vocab_.codebook_size())
            throw ConfigError("oracle truth token outside the codebook range");
}

PredictionGrid OraclePredictor::predict(TaskId, const std::optional<ClassLabel>&,
                                        const CorruptedSequence& corrupted,
                                        const LatentDims& latent) const {
    if (corrupted.size() != truth_.tokens.size() || latent.count() != truth_.tokens.size())
        throw ConfigError("oracle predictor size mismatch");
    PredictionGrid grid(truth_.tokens.size(), vocab_.codebook_size());
    for (std::size_t i = 0; i < truth_.tokens.size(); ++i) grid.row(i)[truth_.tokens[i]] = 1.0;
    return grid;
}

NeighborhoodPredictor::NeighborhoodPredictor(Vocabulary vocab, int embed_dim, int radius)
    : vocab_(vocab), embed_dim_(embed_dim), radius_(radius) {
    if (embed_dim < 1) throw ConfigError("embed_dim must be positive");
    if (radius < 0) throw ConfigError("radius must be non-negative");
    embeddings_.assign(vocab_.total() * embed_dim_, 0.0);
    output_map_.assign(static_cast<std::size_t>(embed_dim_) * vocab_.codebook_size(), 0.0);
    bias_.assign(vocab_.codebook_size(), 0.0);
}

void NeighborhoodPredictor::randomize(std::uint64_t seed, double scale) {
    Rng rng(hash_combine(seed, 0x70726564ull));
    for (double& v : embeddings_) v = scale * (2.0 * rng.next_unit() - 1.0);
    for (double& v : output_map_) v = scale * (2.0 * rng.next_unit() - 1.0);
    for (double& v : bias_) v = scale * (2.0 * rng.next_unit() - 1.0);
}

std::vector<TokenId> NeighborhoodPredictor::member_ids(
    std::size_t i, TaskId prompt, const std::optional<ClassLabel>& label,
    const CorruptedSequence& corrupted, const LatentDims& latent) const {
    const LatticeIdx c = unflatten(i, latent);
    std::vector<TokenId> members;
    for (int dt = -radius_; dt <= radius_; ++dt)
        for (int dy = -radius_; dy <= radius_; ++dy)
            for (int dx = -radius_; dx <= radius_; ++dx) {
                const LatticeIdx n{c.t + dt, c.y + dy, c.x + dx};
                if (n.t < 0 || n.t >= latent.t || n.y < 0 || n.y >= latent.h || n.x < 0 ||
                    n.x >= latent.w)
                    continue;
                members.push_back(corrupted.tokens[flatten(n, latent)]);
            }
    members.push_back(vocab_.prompt_id(prompt));
    members.push_back(vocab_.prefix_class_id(label));
    return members;
}

namespace {

void softmax_row(std::span<const double> logits, std::span<double> out) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        out[j] = std::exp(logits[j] - mx);
        sum += out[j];
    }
    for (std::size_t j = 0; j < logits.size(); ++j) out[j] /= sum;
}

void check_sequence(const Vocabulary& vocab, const CorruptedSequence& corrupted,
                    const LatentDims& latent) {
    if (corrupted.size() != latent.count())
        throw ConfigError("corrupted sequence length does not match the lattice");
    for (TokenId id : corrupted.tokens)
        if (id >= vocab.total()) throw ConfigError("token id outside the vocabulary");
}

} // namespace

PredictionGrid NeighborhoodPredictor::predict(TaskId prompt,
                                              const std::optional<ClassLabel>& label,
                                              const CorruptedSequence& corrupted,
                                              const LatentDims& latent) const {
    check_sequence(vocab_, corrupted, latent);
    const std::size_t n = corrupted.size();
    const std::size_t z = vocab_.codebook_size();
    const std::size_t d = embed_dim_;
    PredictionGrid grid(n, z);
    std::vector<double> mean(d);
    std::vector<double> logits(z);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<TokenId> members = member_ids(i, prompt, label, corrupted, latent);
        std::fill(mean.begin(), mean.end(), 0.0);
        for (TokenId m : members)
            kernels::axpy(1.0, embeddings_.data() + static_cast<std::size_t>(m) * d,
                          mean.data(), d);
        const double inv = 1.0 / static_cast<double>(members.size());
        for (double& v : mean) v *= inv;

        std::copy(bias_.begin(), bias_.end(), logits.begin());
        for (std::size_t kk = 0; kk < d; ++kk)
            kernels::axpy(mean[kk], output_map_.data() + kk * z, logits.data(), z);
        softmax_row(logits, grid.row(i));
    }
    return grid;
}

LossBreakdown commit_loss(const PredictionGrid& grid, const TokenLattice& z,
                          const CorruptedSequence& corrupted) {
    const std::size_t n = z.tokens.size();
    if (grid.rows != n || corrupted.size() != n)
        throw DomainError("loss inputs have mismatched lengths");
    LossBreakdown out;
    for (std::size_t i = 0; i < n; ++i) {
        if (z.tokens[i] >= grid.cols) throw DomainError("target token outside the grid");
        const double p = grid.row(i)[z.tokens[i]];
        const double nll =
            p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
        switch (corrupted.tags[i]) {
            case PositionTag::kCondition: out.refine += nll; break;
            case PositionTag::kMasked: out.mask += nll; break;
            case PositionTag::kTarget: out.recons += nll; break;
        }
        out.total += nll;  // summed independently, in position order
    }
    return out;
}

double loss_ablation_select(const LossBreakdown& breakdown, LossVariant variant) {
    switch (variant) {
        case LossVariant::mask_only: return breakdown.mask;
        case LossVariant::mask_recons: return breakdown.mask + breakdown.recons;
        case LossVariant::full: return breakdown.total;
    }
    throw DomainError("invalid loss variant");
}

Gradients grad_commit_loss(const NeighborhoodPredictor& pred, TaskId prompt,
                           const std::optional<ClassLabel>& label,
                           const CorruptedSequence& corrupted, const TokenLattice& z,
                           LossVariant variant, LossBreakdown* loss_out) {
    const Vocabulary& vocab = pred.vocab();
    const LatentDims latent = z.latent;
    check_sequence(vocab, corrupted, latent);
    const std::size_t zc = vocab.codebook_size();
    const std::size_t d = pred.embed_dim();

    const PredictionGrid grid = pred.predict(prompt, label, corrupted, latent);
    const LossBreakdown loss = commit_loss(grid, z, corrupted);
    if (loss_out) *loss_out = loss;

    Gradients g;
    g.embeddings.assign(pred.embeddings().size(), 0.0);
    g.output_map.assign(pred.output_map().size(), 0.0);
    g.bias.assign(pred.bias().size(), 0.0);

    std::vector<double> mean(d);
    std::vector<double> dlogits(zc);
    std::vector<double> dmean(d);

    for (std::size_t i = 0; i < z.tokens.size(); ++i) {
        if (!tag_in_variant(corrupted.tags[i], variant)) continue;

        // Softmax cross-entropy: dlogits = p - onehot(target).
        std::span<const double> p = grid.row(i);
        std::copy(p.begin(), p.end(), dlogits.begin());
        dlogits[z.tokens[i]] -= 1.0;

        const std::vector<TokenId> members =
            pred.member_ids(i, prompt, label, corrupted, latent);
        std::fill(mean.begin(), mean.end(), 0.0);
        for (TokenId m : members)
            kernels::axpy(1.0, pred.embeddings().data() + static_cast<std::size_t>(m) * d,
                          mean.data(), d);
        const double inv = 1.0 / static_cast<double>(members.size());
        for (double& v : mean) v *= inv;

        kernels::axpy(1.0, dlogits.data(), g.bias.data(), zc);
        for (std::size_t kk = 0; kk < d; ++kk) {
            kernels::axpy(mean[kk], dlogits.data(), g.output_map.data() + kk * zc, zc);
            dmean[kk] = kernels::dot(pred.output_map().data() + kk * zc, dlogits.data(), zc);
        }
        for (TokenId m : members)
            kernels::axpy(inv, dmean.data(),
                          g.embeddings.data() + static_cast<std::size_t>(m) * d, d);
    }
    return g;
}

namespace {

struct AdamState {
    std::vector<double> m, v;
    double beta1, beta2, eps;
    double beta1_pow = 1.0, beta2_pow = 1.0;

    AdamState(std::size_t n, const TrainConfig& cfg)
        : m(n, 0.0), v(n, 0.0), beta1(cfg.adam_beta1), beta2(cfg.adam_beta2),
          eps(cfg.adam_eps) {}

    void step(std::span<double> params, std::span<const double> grad, double lr,
              std::size_t offset) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const std::size_t j = offset + i;
            m[j] = beta1 * m[j] + (1.0 - beta1) * grad[i];
            v[j] = beta2 * v[j] + (1.0 - beta2) * grad[i] * grad[i];
            const double mh = m[j] / (1.0 - beta1_pow);
            const double vh = v[j] / (1.0 - beta2_pow);
            params[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
};

} // namespace

TrainResult train(NeighborhoodPredictor& pred, const std::vector<TrainExample>& corpus,
                  const Codebook& codebook, const LatentDims& latent, const TrainConfig& cfg) {
    if (corpus.empty()) throw ConfigError("training corpus is empty");
    if (cfg.tasks.empty()) throw ConfigError("training task set is empty");
    if (cfg.steps < 0) throw ConfigError("negative training step count");
    if (!(cfg.step_size > 0.0)) throw ConfigError("step_size must be positive");
    if (codebook.size() != pred.vocab().codebook_size())
        throw ConfigError("codebook size does not match the predictor vocabulary");

    // Target tokens are fixed per clip; encode once.
    std::vector<TokenLattice> targets;
    targets.reserve(corpus.size());
    for (const TrainExample& ex : corpus) targets.push_back(encode(ex.video, codebook, latent));

    const TokenId mask_id = pred.vocab().mask_id();
    const Rng base(hash_combine(cfg.seed, 0x747261696eull));

    AdamState adam(pred.parameter_count(), cfg);
    const std::size_t n_embed = pred.embeddings().size();
    const std::size_t n_out = pred.output_map().size();

    TrainResult result;
    result.curve.reserve(cfg.steps);

    for (int step = 0; step < cfg.steps; ++step) {
        Rng step_rng = base.split(static_cast<std::uint64_t>(step));
        const std::size_t ex_idx =
            static_cast<std::size_t>(step_rng.next_unit() * corpus.size());
        const TaskId task = cfg.tasks[static_cast<std::size_t>(
            step_rng.next_unit() * cfg.tasks.size())];
        const TrainExample& ex = corpus[ex_idx];

        std::optional<ClassLabel> label;
        if (task_needs_label(task)) label = ClassLabel{ex.class_id};

        const ConditionVideo cond = build_condition(task, ex.video, cfg.task_params, label);
        const ConditionTokens cond_tokens = encode_condition(cond, codebook, latent);

        const TrainingMask mask = sample_training_mask(latent.count(), cfg.schedule, step_rng);
        const CorruptedSequence corrupted = apply_commit_mask(
            targets[ex_idx], cond_tokens, mask.scores.values, mask.cut, mask_id);

        LossBreakdown loss;
        const Gradients g = grad_commit_loss(pred, task, label, corrupted, targets[ex_idx],
                                             cfg.variant, &loss);
        if (!std::isfinite(loss.total))
            throw TrainingError("training diverged at step " + std::to_string(step));
        result.curve.push_back(loss);

        if (cfg.optimizer == OptimizerKind::sgd) {
            kernels::axpy(-cfg.step_size, g.embeddings.data(), pred.embeddings().data(),
                          g.embeddings.size());
            kernels::axpy(-cfg.step_size, g.output_map.data(), pred.output_map().data(),
                          g.output_map.size());
            kernels::axpy(-cfg.step_size, g.bias.data(), pred.bias().data(), g.bias.size());
        } else {
            adam.beta1_pow *= adam.beta1;
            adam.beta2_pow *= adam.beta2;
            adam.step(pred.embeddings(), g.embeddings, cfg.step_size, 0);
            adam.step(pred.output_map(), g.output_map, cfg.step_size, n_embed);
            adam.step(pred.bias(), g.bias, cfg.step_size, n_embed + n_out);
        }
    }
    return result;
}

void save_predictor(const NeighborhoodPredictor& pred, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint file for writing: " + path.string());
    binio::put_magic(os, "MGPD");
    binio::put_u8(os, 1);
    binio::put_u32(os, static_cast<std::uint32_t>(pred.vocab().codebook_size()));
    binio::put_u32(os, static_cast<std::uint32_t>(pred.vocab().num_classes()));
    binio::put_u32(os, static_cast<std::uint32_t>(pred.embed_dim()));
    binio::put_u32(os, static_cast<std::uint32_t>(pred.radius()));
    for (const std::vector<double>* block :
         {&pred.embeddings(), &pred.output_map(), &pred.bias()})
        for (double v : *block) binio::put_f32(os, static_cast<float>(v));
    if (!os) throw IoError("failed writing checkpoint file: " + path.string());
}

NeighborhoodPredictor load_predictor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint file: " + path.string());
    binio::expect_magic(is, "MGPD", "checkpoint");
    const std::uint8_t version = binio::get_u8(is, "checkpoint version");
    if (version != 1) throw DataError("unsupported checkpoint version");
    const std::uint32_t codebook_size = binio::get_u32(is, "codebook size");
    const std::uint32_t num_classes = binio::get_u32(is, "class count");
    const std::uint32_t embed_dim = binio::get_u32(is, "embed dim");
    const std::uint32_t radius = binio::get_u32(is, "radius");
    NeighborhoodPredictor pred(Vocabulary(codebook_size, num_classes),
                               static_cast<int>(embed_dim), static_cast<int>(radius));
    for (std::vector<double>* block : {&pred.embeddings(), &pred.output_map(), &pred.bias()})
        for (double& v : *block) {
            const float f = binio::get_f32(is, "checkpoint parameter");
            if (!std::isfinite(f)) throw DataError("non-finite parameter in checkpoint");
            v = f;
        }
    return pred;
}

} // namespace magvit
