#include "magvit/tasks.hpp"

#include <algorithm>
#include <cmath>

namespace magvit {

namespace {

struct Rect {
    int row_begin, row_end, col_begin, col_end;
    bool contains(int y, int x) const {
        return y >= row_begin && y < row_end && x >= col_begin && x < col_end;
    }
};

// Integral region extent from a fraction; callers have already validated.
int region_extent(double fraction, int axis) {
    return static_cast<int>(std::lround(fraction * axis));
}

// Centered placement; an odd leftover puts the region one pixel toward the
// top/left.
int centered_begin(int axis, int extent) {
    return (axis - extent) / 2;
}

void check_fraction(double f, int axis, const char* field) {
    if (!(f > 0.0 && f < 1.0))
        throw UsageError(std::string(field) + " must lie strictly between 0 and 1");
    const double scaled = f * axis;
    if (std::abs(scaled - std::lround(scaled)) > 1e-9)
        throw UsageError(std::string(field) + " does not scale the axis to an integer");
}

} // namespace

std::string_view task_name(TaskId id) {
    switch (id) {
        case TaskId::FP: return "FP";
        case TaskId::FI: return "FI";
        case TaskId::OPC: return "OPC";
        case TaskId::OPV: return "OPV";
        case TaskId::OPH: return "OPH";
        case TaskId::OPD: return "OPD";
        case TaskId::IPC: return "IPC";
        case TaskId::IPD: return "IPD";
        case TaskId::CG: return "CG";
        case TaskId::CFP: return "CFP";
    }
    throw DomainError("invalid TaskId");
}

TaskId parse_task_id(std::string_view name) {
    for (TaskId id : kAllTasks)
        if (task_name(id) == name) return id;
    throw UsageError("unknown task \"" + std::string(name) +
                     "\" (expected FP|FI|OPC|OPV|OPH|OPD|IPC|IPD|CG|CFP)");
}

bool task_needs_label(TaskId id) {
    return id == TaskId::CG || id == TaskId::CFP;
}

int dynamic_window_offset(int f, int frames, int width, int window_width) {
    if (frames <= 1) return 0;
    const double span = width - window_width;
    return static_cast<int>(std::lround(span * f / (frames - 1)));
}

void validate_task_params(TaskId task, const Dims3& dims, const TaskParams& params) {
    switch (task) {
        case TaskId::FP:
        case TaskId::CFP:
            if (params.fp_frames < 1 || params.fp_frames >= dims.frames)
                throw UsageError("fp_frames must satisfy 1 <= t < T");
            break;
        case TaskId::FI:
            if (params.fi_head < 1 || params.fi_tail < 1)
                throw UsageError("fi_head and fi_tail must be at least 1");
            if (params.fi_head + params.fi_tail >= dims.frames)
                throw UsageError("fi_head + fi_tail must be smaller than T");
            break;
        case TaskId::OPC:
        case TaskId::IPC:
        case TaskId::IPD:
            check_fraction(params.region_fh, dims.height, "fh");
            check_fraction(params.region_fw, dims.width, "fw");
            break;
        case TaskId::OPV:
        case TaskId::OPD:
            check_fraction(params.region_fw, dims.width, "fw");
            break;
        case TaskId::OPH:
            check_fraction(params.region_fh, dims.height, "fh");
            break;
        case TaskId::CG:
            break;
    }
}

PixelMask build_valid_mask(TaskId task, const Dims3& dims, const TaskParams& params) {
    validate_task_params(task, dims, params);
    PixelMask mask(dims, false);
    const int T = dims.frames, H = dims.height, W = dims.width;

    auto fill_frames = [&](int begin, int end) {
        for (int f = begin; f < end; ++f)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) mask.set(f, y, x, true);
    };

    switch (task) {
        case TaskId::FP:
        case TaskId::CFP:
            fill_frames(0, params.fp_frames);
            break;
        case TaskId::FI:
            fill_frames(0, params.fi_head);
            fill_frames(T - params.fi_tail, T);
            break;
        case TaskId::OPC: {
            const int hh = region_extent(params.region_fh, H);
            const int ww = region_extent(params.region_fw, W);
            const Rect r{centered_begin(H, hh), centered_begin(H, hh) + hh,
                         centered_begin(W, ww), centered_begin(W, ww) + ww};
            for (int f = 0; f < T; ++f)
                for (int y = r.row_begin; y < r.row_end; ++y)
                    for (int x = r.col_begin; x < r.col_end; ++x) mask.set(f, y, x, true);
            break;
        }
        case TaskId::OPV: {
            const int ww = region_extent(params.region_fw, W);
            const int c0 = centered_begin(W, ww);
            for (int f = 0; f < T; ++f)
                for (int y = 0; y < H; ++y)
                    for (int x = c0; x < c0 + ww; ++x) mask.set(f, y, x, true);
            break;
        }
        case TaskId::OPH: {
            const int hh = region_extent(params.region_fh, H);
            const int r0 = centered_begin(H, hh);
            for (int f = 0; f < T; ++f)
                for (int y = r0; y < r0 + hh; ++y)
                    for (int x = 0; x < W; ++x) mask.set(f, y, x, true);
            break;
        }
        case TaskId::OPD: {
            const int ww = region_extent(params.region_fw, W);
            for (int f = 0; f < T; ++f) {
                const int off = dynamic_window_offset(f, T, W, ww);
                for (int y = 0; y < H; ++y)
                    for (int x = off; x < off + ww; ++x) mask.set(f, y, x, true);
            }
            break;
        }
        case TaskId::IPC: {
            const int hh = region_extent(params.region_fh, H);
            const int ww = region_extent(params.region_fw, W);
            const Rect r{centered_begin(H, hh), centered_begin(H, hh) + hh,
                         centered_begin(W, ww), centered_begin(W, ww) + ww};
            for (int f = 0; f < T; ++f)
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) mask.set(f, y, x, !r.contains(y, x));
            break;
        }
        case TaskId::IPD: {
            const int hh = region_extent(params.region_fh, H);
            const int ww = region_extent(params.region_fw, W);
            const int r0 = centered_begin(H, hh);
            for (int f = 0; f < T; ++f) {
                const int off = dynamic_window_offset(f, T, W, ww);
                const Rect r{r0, r0 + hh, off, off + ww};
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) mask.set(f, y, x, !r.contains(y, x));
            }
            break;
        }
        case TaskId::CG:
            // No interior condition: the mask stays all-false.
            break;
    }
    return mask;
}

ConditionVideo build_condition(TaskId task, const VideoTensor& video, const TaskParams& params,
                               std::optional<ClassLabel> label) {
    if (task_needs_label(task) && !label)
        throw UsageError(std::string(task_name(task)) + " requires a class label");
    if (!task_needs_label(task) && label)
        throw UsageError(std::string(task_name(task)) + " does not take a class label");

    const Dims3& d = video.dims;
    ConditionVideo cond;
    cond.valid = build_valid_mask(task, d, params);
    cond.video = VideoTensor(d, 0.0);

    const int T = d.frames, H = d.height, W = d.width, C = d.channels;

    auto copy_frame = [&](int dst, int src) {
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                for (int c = 0; c < C; ++c) cond.video.at(dst, y, x, c) = video.at(src, y, x, c);
    };

    switch (task) {
        case TaskId::FP:
        case TaskId::CFP: {
            const int t = params.fp_frames;
            for (int f = 0; f < t; ++f) copy_frame(f, f);
            // Replicate the last given frame through the rest of the clip.
            for (int f = t; f < T; ++f) copy_frame(f, t - 1);
            break;
        }
        case TaskId::FI: {
            const int t1 = params.fi_head, t2 = params.fi_tail;
            for (int f = 0; f < t1; ++f) copy_frame(f, f);
            for (int f = T - t2; f < T; ++f) copy_frame(f, f);
            // Interpolate between the last head frame and the first tail frame:
            // frame j = ((T-t2-j)*V[t1-1] + (j-t1+1)*V[T-t2]) / (T-t2-t1+1).
            const double denom = T - t2 - t1 + 1;
            for (int f = t1; f < T - t2; ++f) {
                const double wa = (T - t2 - f) / denom;
                const double wb = (f - t1 + 1) / denom;
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x)
                        for (int c = 0; c < C; ++c)
                            cond.video.at(f, y, x, c) =
                                wa * video.at(t1 - 1, y, x, c) + wb * video.at(T - t2, y, x, c);
            }
            break;
        }
        case TaskId::OPC:
        case TaskId::OPV:
        case TaskId::OPH: {
            // Edge padding per frame: clamp the row, then the column, to the
            // valid rectangle (the orders agree on axis-aligned rectangles).
            const int hh = (task == TaskId::OPV) ? H : region_extent(params.region_fh, H);
            const int ww = (task == TaskId::OPH) ? W : region_extent(params.region_fw, W);
            const int r0 = (task == TaskId::OPV) ? 0 : centered_begin(H, hh);
            const int c0 = (task == TaskId::OPH) ? 0 : centered_begin(W, ww);
            for (int f = 0; f < T; ++f)
                for (int y = 0; y < H; ++y) {
                    const int sy = std::clamp(y, r0, r0 + hh - 1);
                    for (int x = 0; x < W; ++x) {
                        const int sx = std::clamp(x, c0, c0 + ww - 1);
                        for (int c = 0; c < C; ++c)
                            cond.video.at(f, y, x, c) = video.at(f, sy, sx, c);
                    }
                }
            break;
        }
        case TaskId::OPD:
        case TaskId::IPC:
        case TaskId::IPD:
            // Zero padding: copy valid pixels over the zero-filled tensor.
            for (int f = 0; f < T; ++f)
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x)
                        if (cond.valid.at(f, y, x))
                            for (int c = 0; c < C; ++c)
                                cond.video.at(f, y, x, c) = video.at(f, y, x, c);
            break;
        case TaskId::CG:
            // Whole clip is zero padding.
            break;
    }
    return cond;
}

double condition_fraction(TaskId task, const Dims3& dims, const TaskParams& params) {
    const PixelMask mask = build_valid_mask(task, dims, params);
    return static_cast<double>(mask.valid_count()) / static_cast<double>(dims.pixel_count());
}

} // namespace magvit
