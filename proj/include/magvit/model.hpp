#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "magvit/masking.hpp"
#include "magvit/tasks.hpp"
#include "magvit/tokenizer.hpp"

namespace magvit {

// Id layout over one flat embedding space: codebook tokens, the mask token,
// ten task prompts, class ids, and a null class used when a task carries no
// label. Ranges are disjoint by construction.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::size_t codebook_size, std::size_t num_classes);

    std::size_t codebook_size() const { return codebook_size_; }
    std::size_t num_classes() const { return num_classes_; }

    TokenId mask_id() const { return static_cast<TokenId>(codebook_size_); }
    TokenId prompt_id(TaskId task) const;
    TokenId class_id(const ClassLabel& label) const;  // ConfigError if out of range
    TokenId null_class_id() const {
        return static_cast<TokenId>(codebook_size_ + 11 + num_classes_);
    }
    // Prefix token for an optional label: class id or the null class.
    TokenId prefix_class_id(const std::optional<ClassLabel>& label) const;

    std::size_t total() const { return codebook_size_ + 12 + num_classes_; }

    bool operator==(const Vocabulary& o) const {
        return codebook_size_ == o.codebook_size_ && num_classes_ == o.num_classes_;
    }

private:
    std::size_t codebook_size_ = 0;
    std::size_t num_classes_ = 0;
};

// Per-position categorical distributions over codebook ids.
struct PredictionGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> probs;  // rows x cols, row-major

    PredictionGrid() = default;
    PredictionGrid(std::size_t r, std::size_t c) : rows(r), cols(c), probs(r * c, 0.0) {}

    std::span<double> row(std::size_t i) { return {probs.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const {
        return {probs.data() + i * cols, cols};
    }
};

// Cross-entropy decomposition by position tag, in nats. Sums, not means.
struct LossBreakdown {
    double refine = 0.0;  // condition positions
    double mask = 0.0;    // masked positions
    double recons = 0.0;  // target positions
    double total = 0.0;   // summed over all positions in order
};

enum class LossVariant { mask_only, mask_recons, full };

LossVariant parse_loss_variant(std::string_view text);
std::string_view loss_variant_name(LossVariant v);
bool tag_in_variant(PositionTag tag, LossVariant variant);

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual const Vocabulary& vocab() const = 0;
    virtual PredictionGrid predict(TaskId prompt, const std::optional<ClassLabel>& label,
                                   const CorruptedSequence& corrupted,
                                   const LatentDims& latent) const = 0;
};

// Testing oracle: one-hot at the ground-truth token regardless of inputs.
class OraclePredictor final : public Predictor {
public:
    OraclePredictor(TokenLattice truth, Vocabulary vocab);

    const Vocabulary& vocab() const override { return vocab_; }
    PredictionGrid predict(TaskId prompt, const std::optional<ClassLabel>& label,
                           const CorruptedSequence& corrupted,
                           const LatentDims& latent) const override;

private:
    TokenLattice truth_;
    Vocabulary vocab_;
};

// Desk-scale predictor: logits at position i are bias plus the output map
// applied to the mean embedding of the tokens within Chebyshev radius
// `radius` of i on the lattice, the task prompt, and the class (or null
// class). Softmax rows.
class NeighborhoodPredictor final : public Predictor {
public:
    NeighborhoodPredictor() = default;
    NeighborhoodPredictor(Vocabulary vocab, int embed_dim = 16, int radius = 1);

    const Vocabulary& vocab() const override { return vocab_; }
    int embed_dim() const { return embed_dim_; }
    int radius() const { return radius_; }

    // Parameter blocks: embeddings vocab.total() x d, output map d x |Z|,
    // bias |Z|; all row-major.
    std::vector<double>& embeddings() { return embeddings_; }
    const std::vector<double>& embeddings() const { return embeddings_; }
    std::vector<double>& output_map() { return output_map_; }
    const std::vector<double>& output_map() const { return output_map_; }
    std::vector<double>& bias() { return bias_; }
    const std::vector<double>& bias() const { return bias_; }

    std::size_t parameter_count() const {
        return embeddings_.size() + output_map_.size() + bias_.size();
    }

    void randomize(std::uint64_t seed, double scale = 0.1);

    PredictionGrid predict(TaskId prompt, const std::optional<ClassLabel>& label,
                           const CorruptedSequence& corrupted,
                           const LatentDims& latent) const override;

    // Member ids feeding position i's mean embedding (neighbor tokens, prompt,
    // class). Exposed for the gradient path and locality tests.
    std::vector<TokenId> member_ids(std::size_t i, TaskId prompt,
                                    const std::optional<ClassLabel>& label,
                                    const CorruptedSequence& corrupted,
                                    const LatentDims& latent) const;

private:
    Vocabulary vocab_;
    int embed_dim_ = 0;
    int radius_ = 0;
    std::vector<double> embeddings_;
    std::vector<double> output_map_;
    std::vector<double> bias_;
};

// Loss over a prediction grid against the ground-truth lattice, split by the
// corruption tags. A zero probability at a target token yields +inf, not an
// error.
LossBreakdown commit_loss(const PredictionGrid& grid, const TokenLattice& z,
                          const CorruptedSequence& corrupted);

double loss_ablation_select(const LossBreakdown& breakdown, LossVariant variant);

struct Gradients {
    std::vector<double> embeddings;
    std::vector<double> output_map;
    std::vector<double> bias;
};

// Analytic gradient of the selected loss variant w.r.t. every predictor
// parameter, with the loss value of the same forward pass.
Gradients grad_commit_loss(const NeighborhoodPredictor& pred, TaskId prompt,
                           const std::optional<ClassLabel>& label,
                           const CorruptedSequence& corrupted, const TokenLattice& z,
                           LossVariant variant, LossBreakdown* loss_out = nullptr);

struct TrainExample {
    VideoTensor video;
    int class_id = 0;
};

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
    int steps = 2000;
    double step_size = 0.02;
    std::uint64_t seed = 0;
    LossVariant variant = LossVariant::full;
    std::vector<TaskId> tasks{kAllTasks.begin(), kAllTasks.end()};
    TaskParams task_params;
    Schedule schedule;
    OptimizerKind optimizer = OptimizerKind::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct TrainResult {
    std::vector<LossBreakdown> curve;  // one entry per step
};

// One pass per step: sample an example and a task, build and tokenize the
// condition, sample a training mask, corrupt, and take a gradient step.
// Deterministic given cfg.seed. Throws TrainingError on a non-finite loss.
TrainResult train(NeighborhoodPredictor& pred, const std::vector<TrainExample>& corpus,
                  const Codebook& codebook, const LatentDims& latent, const TrainConfig& cfg);

// Checkpoint file ("MGPD"): magic, version u8, codebook size u32, class count
// u32, embed dim u32, radius u32, parameters as little-endian f32.
void save_predictor(const NeighborhoodPredictor& pred, const std::filesystem::path& path);
NeighborhoodPredictor load_predictor(const std::filesystem::path& path);

} // namespace magvit
