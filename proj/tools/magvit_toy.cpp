// magvit-toy: end-to-end harness for conditional masked token modeling on
// synthetic video. Subcommands: make-data, fit-vq, train, generate, eval,
// bench.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "magvit/decode.hpp"
#include "magvit/harness.hpp"
#include "magvit/io.hpp"
#include "magvit/kernels.hpp"
#include "magvit/strfmt.hpp"

namespace fs = std::filesystem;
using namespace magvit;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<long> seed;
    std::optional<std::string> task;
    std::optional<int> steps;
    std::optional<double> temperature;
    std::optional<std::string> schedule;
    std::optional<std::string> out;
    bool oracle = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_oracle = false) {
    cmd->add_option("--config", flags.config_path, "config file (key = value sections)");
    cmd->add_option("--seed", flags.seed, "override the subcommand's seed");
    cmd->add_option("--task", flags.task,
                    "task id: FP|FI|OPC|OPV|OPH|OPD|IPC|IPD|CG|CFP");
    cmd->add_option("--steps", flags.steps, "decode steps K");
    cmd->add_option("--temperature", flags.temperature, "decode temperature");
    cmd->add_option("--schedule", flags.schedule,
                    "mask schedule: cosine|uniform|exponential[,lambda=<real>]");
    cmd->add_option("--out", flags.out, "output directory");
    if (with_oracle)
        cmd->add_flag("--oracle", flags.oracle,
                      "use the ground-truth oracle predictor instead of the checkpoint");
}

RunConfig load_run_config(const CommonFlags& flags) {
    Config cfg;
    if (!flags.config_path.empty()) cfg = Config::load(flags.config_path);
    RunConfig rc = RunConfig::from(cfg);
    if (flags.out) {
        rc.out_dir = *flags.out;
        // Re-derive defaulted artifact paths against the new base.
        if (!cfg.has("vq.path")) rc.codebook_path = rc.out_dir / "codebook.mgcb";
        if (!cfg.has("model.checkpoint")) rc.checkpoint_path = rc.out_dir / "predictor.mgpd";
        if (!cfg.has("train.curve")) rc.curve_path = rc.out_dir / "loss_curve.csv";
    }
    if (flags.steps) rc.decode.steps = *flags.steps;
    if (flags.temperature) rc.decode.temperature = *flags.temperature;
    if (flags.schedule) rc.decode.schedule = parse_schedule(*flags.schedule);
    return rc;
}

Vocabulary make_vocab(const RunConfig& rc, const Codebook& codebook) {
    return Vocabulary(codebook.size(), rc.num_classes);
}

int run_make_data(const CommonFlags& flags) {
    RunConfig rc = load_run_config(flags);
    SyntheticSpec spec = rc.synth;
    if (flags.seed) spec.seed = static_cast<std::uint64_t>(*flags.seed);
    const fs::path dir = flags.out ? fs::path(*flags.out) : rc.data_dir;
    const Dataset dataset = make_dataset(spec);
    save_dataset(dataset, spec, dir);
    std::cout << "wrote " << dataset.examples.size() << " clips ("
              << motif_name(spec.motif) << ", seed " << spec.seed << ") to " << dir.string()
              << "\n";
    return 0;
}

int run_fit_vq(const CommonFlags& flags) {
    RunConfig rc = load_run_config(flags);
    if (flags.seed) rc.fit.seed = static_cast<std::uint64_t>(*flags.seed);
    const Dataset dataset = load_dataset(rc.data_dir);
    std::vector<VideoTensor> videos;
    videos.reserve(dataset.examples.size());
    for (const TrainExample& ex : dataset.examples) videos.push_back(ex.video);
    const Codebook codebook = fit_codebook(videos, rc.latent, rc.fit);
    fs::create_directories(rc.codebook_path.parent_path());
    save_codebook(codebook, rc.codebook_path);

    double psnr_sum = 0.0;
    for (const VideoTensor& v : videos)
        psnr_sum += psnr(decode(encode(v, codebook, rc.latent), codebook, v.dims), v);
    std::cout << strfmt("codebook %zu x %zu -> %s (mean reconstruction psnr %.2f dB)\n",
                        codebook.size(), codebook.dim, rc.codebook_path.string().c_str(),
                        psnr_sum / videos.size());
    return 0;
}

int run_train(const CommonFlags& flags) {
    RunConfig rc = load_run_config(flags);
    if (flags.seed) rc.train.seed = static_cast<std::uint64_t>(*flags.seed);
    if (flags.task) rc.train.tasks = parse_task_list(*flags.task);
    const Dataset dataset = load_dataset(rc.data_dir);
    const Codebook codebook = load_codebook(rc.codebook_path);

    NeighborhoodPredictor pred(make_vocab(rc, codebook), rc.embed_dim, rc.radius);
    // Zero parameters are a symmetry trap (embedding and output-map gradients
    // vanish together); break it with a small seeded init.
    pred.randomize(rc.train.seed);
    const TrainResult result = train(pred, dataset.examples, codebook, rc.latent, rc.train);

    fs::create_directories(rc.checkpoint_path.parent_path());
    save_predictor(pred, rc.checkpoint_path);

    fs::create_directories(rc.curve_path.parent_path());
    std::ofstream curve(rc.curve_path);
    if (!curve) throw IoError("cannot write loss curve: " + rc.curve_path.string());
    curve << "step,refine,mask,recons,total\n";
    for (std::size_t i = 0; i < result.curve.size(); ++i) {
        const LossBreakdown& l = result.curve[i];
        curve << i << ',' << strfmt("%.17g,%.17g,%.17g,%.17g\n", l.refine, l.mask,
                                    l.recons, l.total);
    }

    const LossBreakdown& last = result.curve.empty() ? LossBreakdown{} : result.curve.back();
    std::cout << strfmt("trained %d steps (%s, %s) -> %s (final loss %.4f)\n",
                        rc.train.steps,
                        std::string(loss_variant_name(rc.train.variant)).c_str(),
                        rc.train.optimizer == OptimizerKind::adam ? "adam" : "sgd",
                        rc.checkpoint_path.string().c_str(), last.total);
    return 0;
}

std::unique_ptr<Predictor> pick_predictor(const RunConfig& rc, const Codebook& codebook,
                                          bool oracle, const VideoTensor& clip) {
    if (oracle)
        return std::make_unique<OraclePredictor>(encode(clip, codebook, rc.latent),
                                                 make_vocab(rc, codebook));
    return std::make_unique<NeighborhoodPredictor>(load_predictor(rc.checkpoint_path));
}

int run_generate(const CommonFlags& flags) {
    RunConfig rc = load_run_config(flags);
    if (flags.seed) rc.decode.seed = static_cast<std::uint64_t>(*flags.seed);
    const TaskId task = flags.task ? parse_task_id(*flags.task) : TaskId::FP;
    const Dataset dataset = load_dataset(rc.eval_dir.empty() ? rc.data_dir : rc.eval_dir);
    const Codebook codebook = load_codebook(rc.codebook_path);

    if (rc.generate_clip < 0 ||
        static_cast<std::size_t>(rc.generate_clip) >= dataset.examples.size())
        throw ConfigError("config key \"generate.clip\" is out of range");
    const TrainExample& ex = dataset.examples[static_cast<std::size_t>(rc.generate_clip)];

    std::optional<ClassLabel> label;
    if (task_needs_label(task)) label = ClassLabel{ex.class_id};

    const auto pred = pick_predictor(rc, codebook, flags.oracle, ex.video);
    const ConditionVideo cond = build_condition(task, ex.video, rc.train.task_params, label);
    const ConditionTokens cond_tokens = encode_condition(cond, codebook, rc.latent);
    const DecodeResult res =
        commit_decode(*pred, task, label, cond_tokens, rc.latent, rc.decode);

    fs::create_directories(rc.out_dir);
    const std::string stem = std::string("generate_") + std::string(task_name(task));
    save_tokens(res.tokens, rc.out_dir / (stem + ".mgt"));
    const VideoTensor decoded = decode(res.tokens, codebook, ex.video.dims);
    save_video(decoded, rc.out_dir / (stem + ".mgv"));
    save_video(cond.video, rc.out_dir / (stem + "_condition.mgv"));
    save_trace(res.trace, rc.out_dir / (stem + "_trace.txt"));
    if (rc.snapshots)
        for (const DecodeStepRecord& rec : res.trace.steps) {
            TokenLattice snap{rc.latent, rec.tokens};
            save_tokens(snap, rc.out_dir / strfmt("%s_step%02d.mgt", stem.c_str(), rec.step));
        }

    const TokenLattice truth = encode(ex.video, codebook, rc.latent);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.tokens.size(); ++i)
        hits += res.tokens.tokens[i] == truth.tokens[i];
    std::cout << strfmt(
        "%s: clip %d decoded in %d steps, token accuracy %.4f, psnr %.2f dB -> %s\n",
        std::string(task_name(task)).c_str(), rc.generate_clip, rc.decode.steps,
        static_cast<double>(hits) / truth.tokens.size(), psnr(decoded, ex.video),
        rc.out_dir.string().c_str());
    return 0;
}

int run_eval(const CommonFlags& flags) {
    RunConfig rc = load_run_config(flags);
    if (flags.seed) rc.decode.seed = static_cast<std::uint64_t>(*flags.seed);
    if (flags.task) rc.eval_tasks = parse_task_list(*flags.task);
    const Dataset dataset = load_dataset(rc.eval_dir.empty() ? rc.data_dir : rc.eval_dir);
    const Codebook codebook = load_codebook(rc.codebook_path);

    const std::size_t n_clips =
        std::min<std::size_t>(dataset.examples.size(), rc.eval_clips);
    std::vector<TrainExample> clips(dataset.examples.begin(),
                                    dataset.examples.begin() + n_clips);

    std::vector<EvalRow> rows;
    for (TaskId task : rc.eval_tasks) {
        if (flags.oracle) {
            // A fresh oracle per clip; eval_task expects one predictor, so run
            // clip-by-clip and average.
            EvalRow row{};
            row.task = task;
            row.condition_fraction =
                condition_fraction(task, clips.front().video.dims, rc.train.task_params);
            double acc = 0.0, ps = 0.0;
            for (std::size_t c = 0; c < clips.size(); ++c) {
                OraclePredictor oracle(encode(clips[c].video, codebook, rc.latent),
                                       make_vocab(rc, codebook));
                const std::vector<TrainExample> one{clips[c]};
                DecodeConfig cfg = rc.decode;
                cfg.seed = hash_combine(rc.decode.seed, c);
                const EvalRow r = eval_task(oracle, one, codebook, rc.latent, task,
                                            rc.train.task_params, cfg);
                acc += r.token_accuracy;
                ps += r.psnr;
            }
            row.token_accuracy = acc / clips.size();
            row.psnr = ps / clips.size();
            rows.push_back(row);
        } else {
            const NeighborhoodPredictor pred = load_predictor(rc.checkpoint_path);
            rows.push_back(eval_task(pred, clips, codebook, rc.latent, task,
                                     rc.train.task_params, rc.decode));
        }
    }

    const std::string table = format_eval_table(rows);
    std::cout << table;
    fs::create_directories(rc.out_dir);
    std::ofstream os(rc.out_dir / "eval.txt");
    os << table;
    return 0;
}

int run_bench(const CommonFlags& flags) {
    RunConfig rc = load_run_config(flags);
    if (flags.steps) rc.bench_steps = static_cast<std::size_t>(*flags.steps);
    std::cout << format_bench_table(rc.bench_seq_len, rc.bench_steps, rc.bench_ar_steps,
                                    rc.bench_alt_seq_len);
    std::cout << "kernel backend: " << kernels::backend_name(kernels::active_backend())
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional masked token modeling toolkit for toy video"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* make_data = app.add_subcommand("make-data", "generate a synthetic dataset");
    add_common(make_data, flags);
    auto* fit_vq = app.add_subcommand("fit-vq", "fit the k-means codebook");
    add_common(fit_vq, flags);
    auto* train_cmd = app.add_subcommand("train", "train the predictor");
    add_common(train_cmd, flags);
    auto* generate = app.add_subcommand("generate", "decode one clip for a task");
    add_common(generate, flags, true);
    auto* eval_cmd = app.add_subcommand("eval", "per-task accuracy/psnr table");
    add_common(eval_cmd, flags, true);
    auto* bench = app.add_subcommand("bench", "step/cost comparison table");
    add_common(bench, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (make_data->parsed()) return run_make_data(flags);
        if (fit_vq->parsed()) return run_fit_vq(flags);
        if (train_cmd->parsed()) return run_train(flags);
        if (generate->parsed()) return run_generate(flags);
        if (eval_cmd->parsed()) return run_eval(flags);
        if (bench->parsed()) return run_bench(flags);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
