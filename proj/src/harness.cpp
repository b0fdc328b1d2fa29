#include "magvit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "magvit/rng.hpp"
#include "magvit/strfmt.hpp"

namespace magvit {

namespace {

// The eight unit directions, indexed as classes for moving_square.
constexpr int kDirections[8][2] = {{0, 1},  {1, 1},   {1, 0},  {1, -1},
                                   {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}};

int wrap(int v, int m) {
    const int r = v % m;
    return r < 0 ? r + m : r;
}

void draw_square(VideoTensor& video, int frame, int top, int left, int edge) {
    const int H = video.dims.height, W = video.dims.width;
    for (int dy = 0; dy < edge; ++dy)
        for (int dx = 0; dx < edge; ++dx)
            for (int c = 0; c < video.dims.channels; ++c)
                video.at(frame, wrap(top + dy, H), wrap(left + dx, W), c) = 1.0;
}

} // namespace

std::string_view motif_name(Motif m) {
    switch (m) {
        case Motif::moving_square: return "moving_square";
        case Motif::bouncing_bar: return "bouncing_bar";
        case Motif::constant: return "constant";
    }
    throw DomainError("invalid motif");
}

Motif parse_motif(std::string_view name) {
    if (name == "moving_square") return Motif::moving_square;
    if (name == "bouncing_bar") return Motif::bouncing_bar;
    if (name == "constant") return Motif::constant;
    throw UsageError("unknown motif \"" + std::string(name) +
                     "\" (expected moving_square|bouncing_bar|constant)");
}

std::size_t motif_class_count(Motif m) {
    switch (m) {
        case Motif::moving_square: return 8;
        case Motif::bouncing_bar: return 2;
        case Motif::constant: return 1;
    }
    throw DomainError("invalid motif");
}

Dataset make_dataset(const SyntheticSpec& spec) {
    const Dims3& d = spec.dims;
    if (spec.count < 1) throw ConfigError("dataset count must be positive");
    if (spec.square < 1 || spec.square > d.height || spec.square > d.width)
        throw ConfigError("square size does not fit the frame");
    if (spec.speed < 0) throw ConfigError("speed must be non-negative");

    Dataset out;
    out.dims = d;
    out.examples.reserve(spec.count);
    const Rng base(hash_combine(spec.seed, 0x64617461ull));

    for (int clip = 0; clip < spec.count; ++clip) {
        Rng rng = base.split(static_cast<std::uint64_t>(clip));
        TrainExample ex;
        ex.video = VideoTensor(d, 0.0);
        const int sy = static_cast<int>(rng.next_unit() * d.height);
        const int sx = static_cast<int>(rng.next_unit() * d.width);
        switch (spec.motif) {
            case Motif::moving_square: {
                const int dir = static_cast<int>(rng.next_unit() * 8);
                ex.class_id = dir;
                const int vy = kDirections[dir][0] * spec.speed;
                const int vx = kDirections[dir][1] * spec.speed;
                for (int f = 0; f < d.frames; ++f)
                    draw_square(ex.video, f, sy + vy * f, sx + vx * f, spec.square);
                break;
            }
            case Motif::bouncing_bar: {
                const int dir = rng.next_unit() < 0.5 ? -1 : 1;
                ex.class_id = dir < 0 ? 0 : 1;
                const int span = d.width - spec.square;
                const int phase = span > 0 ? sx % (span + 1) : 0;
                for (int f = 0; f < d.frames; ++f) {
                    int x = 0;
                    if (span > 0) {
                        const int period = 2 * span;
                        const int m = wrap(phase + dir * spec.speed * f, period);
                        x = m <= span ? m : period - m;
                    }
                    for (int y = 0; y < d.height; ++y)
                        for (int dx = 0; dx < spec.square; ++dx)
                            for (int c = 0; c < d.channels; ++c)
                                ex.video.at(f, y, x + dx, c) = 1.0;
                }
                break;
            }
            case Motif::constant: {
                ex.class_id = 0;
                for (int f = 0; f < d.frames; ++f)
                    draw_square(ex.video, f, sy, sx, spec.square);
                break;
            }
        }
        out.examples.push_back(std::move(ex));
    }
    return out;
}

void save_dataset(const Dataset& dataset, const SyntheticSpec& spec,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream meta(dir / "meta.cfg");
        if (!meta) throw IoError("cannot write dataset meta: " + (dir / "meta.cfg").string());
        meta << "[data]\n";
        meta << "dims = " << spec.dims.frames << "x" << spec.dims.height << "x"
             << spec.dims.width << "x" << spec.dims.channels << "\n";
        meta << "motif = " << motif_name(spec.motif) << "\n";
        meta << "count = " << dataset.examples.size() << "\n";
        meta << "seed = " << spec.seed << "\n";
        meta << "square = " << spec.square << "\n";
        meta << "speed = " << spec.speed << "\n";
    }
    {
        std::ofstream labels(dir / "labels.txt");
        if (!labels) throw IoError("cannot write dataset labels");
        for (const TrainExample& ex : dataset.examples) labels << ex.class_id << "\n";
    }
    for (std::size_t i = 0; i < dataset.examples.size(); ++i)
        save_video(dataset.examples[i].video,
                   dir / strfmt("clip_%04zu.mgv", i));
}

Dataset load_dataset(const std::filesystem::path& dir) {
    const Config meta = Config::load(dir / "meta.cfg");
    const long count = meta.get_int("data.count", -1);
    if (count < 1) throw DataError("dataset meta has no clip count: " + dir.string());

    std::vector<int> labels;
    {
        std::ifstream is(dir / "labels.txt");
        if (!is) throw IoError("cannot open dataset labels: " + (dir / "labels.txt").string());
        int v;
        while (is >> v) labels.push_back(v);
    }
    if (labels.size() != static_cast<std::size_t>(count))
        throw DataError("label count does not match clip count in " + dir.string());

    Dataset out;
    for (long i = 0; i < count; ++i) {
        TrainExample ex;
        ex.video = load_video(dir / strfmt("clip_%04zu.mgv", i));
        ex.class_id = labels[static_cast<std::size_t>(i)];
        if (i == 0) out.dims = ex.video.dims;
        else if (!(ex.video.dims == out.dims))
            throw DataError("dataset clips have inconsistent dims");
        out.examples.push_back(std::move(ex));
    }
    return out;
}

EvalRow eval_task(const Predictor& pred, const std::vector<TrainExample>& clips,
                  const Codebook& codebook, const LatentDims& latent, TaskId task,
                  const TaskParams& params, const DecodeConfig& cfg) {
    if (clips.empty()) throw ConfigError("eval clip set is empty");
    EvalRow row;
    row.task = task;
    row.condition_fraction = condition_fraction(task, clips.front().video.dims, params);

    double acc_sum = 0.0;
    double psnr_sum = 0.0;
    for (std::size_t c = 0; c < clips.size(); ++c) {
        const TrainExample& ex = clips[c];
        std::optional<ClassLabel> label;
        if (task_needs_label(task)) label = ClassLabel{ex.class_id};

        const TokenLattice truth = encode(ex.video, codebook, latent);
        const ConditionVideo cond = build_condition(task, ex.video, params, label);
        const ConditionTokens cond_tokens = encode_condition(cond, codebook, latent);

        DecodeConfig clip_cfg = cfg;
        clip_cfg.seed = hash_combine(cfg.seed, c);
        const DecodeResult res =
            commit_decode(pred, task, label, cond_tokens, latent, clip_cfg);

        std::size_t hits = 0;
        for (std::size_t i = 0; i < truth.tokens.size(); ++i)
            hits += res.tokens.tokens[i] == truth.tokens[i];
        acc_sum += static_cast<double>(hits) / static_cast<double>(truth.tokens.size());
        psnr_sum += psnr(decode(res.tokens, codebook, ex.video.dims), ex.video);
    }
    row.token_accuracy = acc_sum / static_cast<double>(clips.size());
    row.psnr = psnr_sum / static_cast<double>(clips.size());
    return row;
}

std::string format_eval_table(const std::vector<EvalRow>& rows) {
    std::ostringstream os;
    os << strfmt("%-6s %10s %10s %10s\n", "task", "cond_frac", "tok_acc", "psnr_db");
    for (const EvalRow& r : rows)
        os << strfmt("%-6s %10.4f %10.4f %10.2f\n", std::string(task_name(r.task)).c_str(),
                     r.condition_fraction, r.token_accuracy, r.psnr);
    return os.str();
}

std::string format_bench_table(std::size_t seq_len, std::size_t nar_steps,
                               std::size_t ar_steps, std::size_t alt_seq_len) {
    const CostReport nar = cost_report(seq_len, nar_steps, nar_steps);
    const CostReport ar = cost_report(seq_len, nar_steps, ar_steps);
    const CostReport alt = cost_report(alt_seq_len, nar_steps, nar_steps);

    std::ostringstream os;
    os << strfmt("%-22s %8s %7s %14s %14s %12s\n", "decoder", "seq_len", "steps",
                 "cost_per_step", "total_cost", "ratio_vs_nar");
    auto row = [&](const char* name, std::size_t len, std::size_t steps) {
        const double per_step = static_cast<double>(len) * static_cast<double>(len);
        const double total = per_step * static_cast<double>(steps);
        os << strfmt("%-22s %8zu %7zu %14.0f %14.0f %12.2f\n", name, len, steps, per_step,
                     total, total / nar.nar_total);
    };
    row("commit-nar", seq_len, nar_steps);
    row("ar", seq_len, ar_steps);
    row("2d-seq-what-if", alt_seq_len, nar_steps);
    os << strfmt("step ratio ar/nar: %.2f\n", ar.step_ratio);
    os << strfmt("per-step cost ratio 2d/3d: %.2f\n", alt.per_step_cost / nar.per_step_cost);
    return os.str();
}

std::vector<TaskId> parse_task_list(const std::string& text) {
    std::vector<TaskId> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        out.push_back(parse_task_id(item));
    }
    if (out.empty()) throw UsageError("empty task list");
    return out;
}

namespace {

Dims3 parse_dims(const std::string& text, const std::string& key) {
    int v[4] = {0, 0, 0, 1};
    std::istringstream is(text);
    std::string part;
    int i = 0;
    while (std::getline(is, part, 'x')) {
        if (i >= 4) throw ConfigError("config key \"" + key + "\" has too many axes");
        try {
            v[i++] = std::stoi(part);
        } catch (const std::exception&) {
            throw ConfigError("config key \"" + key + "\" is not TxHxWxC: " + text);
        }
    }
    if (i < 3) throw ConfigError("config key \"" + key + "\" needs TxHxW[xC]: " + text);
    try {
        return Dims3(v[0], v[1], v[2], v[3]);
    } catch (const DomainError& e) {
        throw ConfigError("config key \"" + key + "\": " + e.what());
    }
}

LatentDims parse_latent(const std::string& text, const std::string& key) {
    const Dims3 d = parse_dims(text + "x1", key);
    return LatentDims(d.frames, d.height, d.width);
}

} // namespace

RunConfig RunConfig::from(const Config& cfg) {
    RunConfig rc;
    rc.out_dir = cfg.get_string("out.dir", "out");

    rc.data_dir = cfg.get_string("data.dir", "data");
    rc.eval_dir = cfg.get_string("data.eval_dir", "");
    rc.synth.dims = parse_dims(cfg.get_string("data.dims", "16x16x16x1"), "data.dims");
    rc.synth.motif = parse_motif(cfg.get_string("data.motif", "moving_square"));
    rc.synth.count = static_cast<int>(cfg.get_int("data.count", 500));
    rc.synth.seed = static_cast<std::uint64_t>(cfg.get_int("data.seed", 0));
    rc.synth.square = static_cast<int>(cfg.get_int("data.square", 5));
    rc.synth.speed = static_cast<int>(cfg.get_int("data.speed", 1));
    rc.latent = parse_latent(cfg.get_string("data.latent", "4x4x4"), "data.latent");

    rc.fit.size = static_cast<std::size_t>(cfg.get_int("vq.codebook", 64));
    rc.fit.max_iters = static_cast<int>(cfg.get_int("vq.iters", 50));
    rc.fit.seed = static_cast<std::uint64_t>(cfg.get_int("vq.seed", 0));
    rc.codebook_path = cfg.get_string("vq.path", (rc.out_dir / "codebook.mgcb").string());

    rc.embed_dim = static_cast<int>(cfg.get_int("model.dim", 16));
    rc.radius = static_cast<int>(cfg.get_int("model.radius", 1));
    rc.num_classes = static_cast<std::size_t>(cfg.get_int("model.classes", 8));
    rc.checkpoint_path =
        cfg.get_string("model.checkpoint", (rc.out_dir / "predictor.mgpd").string());

    rc.train.steps = static_cast<int>(cfg.get_int("train.steps", 2000));
    rc.train.step_size = cfg.get_real("train.step_size", 0.02);
    rc.train.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed", 1));
    rc.train.variant = parse_loss_variant(cfg.get_string("train.loss", "full"));
    rc.train.tasks = parse_task_list(
        cfg.get_string("train.tasks", "FP,FI,OPC,OPV,OPH,OPD,IPC,IPD,CG,CFP"));
    const std::string optimizer = cfg.get_string("train.optimizer", "adam");
    if (optimizer == "adam") rc.train.optimizer = OptimizerKind::adam;
    else if (optimizer == "sgd") rc.train.optimizer = OptimizerKind::sgd;
    else throw ConfigError("config key \"train.optimizer\" must be adam|sgd");
    rc.train.schedule = parse_schedule(cfg.get_string("train.schedule", "cosine"));
    rc.curve_path = cfg.get_string("train.curve", (rc.out_dir / "loss_curve.csv").string());

    rc.train.task_params.fp_frames = static_cast<int>(cfg.get_int("task.fp_frames", 1));
    rc.train.task_params.fi_head = static_cast<int>(cfg.get_int("task.fi_head", 1));
    rc.train.task_params.fi_tail = static_cast<int>(cfg.get_int("task.fi_tail", 1));
    rc.train.task_params.region_fh = cfg.get_real("task.fh", 0.5);
    rc.train.task_params.region_fw = cfg.get_real("task.fw", 0.5);

    rc.decode.steps = static_cast<int>(cfg.get_int("decode.steps", 12));
    rc.decode.temperature = cfg.get_real("decode.temperature", 4.5);
    rc.decode.schedule = parse_schedule(cfg.get_string("decode.schedule", "cosine"));
    rc.decode.seed = static_cast<std::uint64_t>(cfg.get_int("decode.seed", 0));
    rc.snapshots = cfg.get_bool("decode.snapshots", false);

    rc.eval_tasks = parse_task_list(
        cfg.get_string("eval.tasks", "FP,FI,OPC,OPV,OPH,OPD,IPC,IPD,CG,CFP"));
    rc.eval_clips = static_cast<int>(cfg.get_int("eval.clips", 8));

    rc.generate_clip = static_cast<int>(cfg.get_int("generate.clip", 0));

    rc.bench_seq_len = static_cast<std::size_t>(cfg.get_int("bench.n", 1024));
    rc.bench_steps = static_cast<std::size_t>(cfg.get_int("bench.steps", 12));
    rc.bench_ar_steps = static_cast<std::size_t>(cfg.get_int("bench.ar_steps", 0));
    if (rc.bench_ar_steps == 0) rc.bench_ar_steps = rc.bench_seq_len;
    rc.bench_alt_seq_len = static_cast<std::size_t>(cfg.get_int("bench.alt_len", 4096));

    if (rc.eval_clips < 1) throw ConfigError("config key \"eval.clips\" must be positive");
    if (rc.decode.steps < 1) throw ConfigError("config key \"decode.steps\" must be >= 1");
    if (rc.decode.temperature < 0.0)
        throw ConfigError("config key \"decode.temperature\" must be non-negative");

    return rc;
}

} // namespace magvit
