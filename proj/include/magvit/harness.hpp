#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "magvit/decode.hpp"
#include "magvit/io.hpp"
#include "magvit/model.hpp"

namespace magvit {

enum class Motif { moving_square, bouncing_bar, constant };

std::string_view motif_name(Motif m);
Motif parse_motif(std::string_view name);

// Deterministic toy corpus. moving_square translates a bright square at a
// constant integer velocity with wraparound; the class id encodes the motion
// direction (8 classes). bouncing_bar reflects a vertical bar off the side
// walls (2 classes, the initial direction). constant repeats a static frame
// (1 class).
struct SyntheticSpec {
    Dims3 dims{16, 16, 16, 1};
    Motif motif = Motif::moving_square;
    int count = 500;
    std::uint64_t seed = 0;
    int square = 5;  // square edge / bar width, pixels
    int speed = 1;   // displacement per frame, pixels
};

struct Dataset {
    Dims3 dims;
    std::vector<TrainExample> examples;
};

std::size_t motif_class_count(Motif m);

Dataset make_dataset(const SyntheticSpec& spec);

// Dataset directory: meta.cfg, clip_NNNN.mgv per clip, labels.txt with one
// class id per line. Bit-identical for identical specs.
void save_dataset(const Dataset& dataset, const SyntheticSpec& spec,
                  const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

struct EvalRow {
    TaskId task;
    double condition_fraction = 0.0;
    double token_accuracy = 0.0;  // decoded tokens vs encode(source)
    double psnr = 0.0;            // decoded video vs source video
};

// Runs commit decoding for one task over the clips (seed split per clip) and
// averages token accuracy and PSNR against the ground truth.
EvalRow eval_task(const Predictor& pred, const std::vector<TrainExample>& clips,
                  const Codebook& codebook, const LatentDims& latent, TaskId task,
                  const TaskParams& params, const DecodeConfig& cfg);

std::string format_eval_table(const std::vector<EvalRow>& rows);

// Cost comparison table: the NAR decoder, the AR baseline, and a what-if row
// at the 2D-tokenizer sequence length.
std::string format_bench_table(std::size_t seq_len, std::size_t nar_steps,
                               std::size_t ar_steps, std::size_t alt_seq_len);

// Typed view over the config file; validation failures name the offending
// key.
struct RunConfig {
    std::filesystem::path out_dir = "out";

    std::filesystem::path data_dir = "data";
    std::filesystem::path eval_dir;  // empty: reuse data_dir
    SyntheticSpec synth;
    LatentDims latent{4, 4, 4};

    FitConfig fit;
    std::filesystem::path codebook_path;  // default <out>/codebook.mgcb

    int embed_dim = 16;
    int radius = 1;
    std::size_t num_classes = 8;
    std::filesystem::path checkpoint_path;  // default <out>/predictor.mgpd

    TrainConfig train;
    std::filesystem::path curve_path;  // default <out>/loss_curve.csv

    DecodeConfig decode;
    bool snapshots = false;

    std::vector<TaskId> eval_tasks{kAllTasks.begin(), kAllTasks.end()};
    int eval_clips = 8;

    int generate_clip = 0;

    std::size_t bench_seq_len = 1024;
    std::size_t bench_steps = 12;
    std::size_t bench_ar_steps = 0;  // 0: seq_len
    std::size_t bench_alt_seq_len = 4096;

    static RunConfig from(const Config& cfg);
};

std::vector<TaskId> parse_task_list(const std::string& text);

} // namespace magvit
