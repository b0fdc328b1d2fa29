#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "magvit/lattice.hpp"

namespace magvit {

// The ten generation tasks. Serialized as these uppercase identifiers in
// configs and CLI flags.
enum class TaskId {
    FP,   // frame prediction
    FI,   // frame interpolation
    OPC,  // central outpainting
    OPV,  // vertical outpainting
    OPH,  // horizontal outpainting
    OPD,  // dynamic outpainting
    IPC,  // central inpainting
    IPD,  // dynamic inpainting
    CG,   // class-conditional generation
    CFP,  // class-conditional frame prediction
};

inline constexpr std::array<TaskId, 10> kAllTasks = {
    TaskId::FP,  TaskId::FI,  TaskId::OPC, TaskId::OPV, TaskId::OPH,
    TaskId::OPD, TaskId::IPC, TaskId::IPD, TaskId::CG,  TaskId::CFP};

std::string_view task_name(TaskId id);
TaskId parse_task_id(std::string_view name);  // UsageError on unknown name

// True for the tasks whose prefix condition is a class label (CG, CFP).
bool task_needs_label(TaskId id);

struct ClassLabel {
    int id = 0;
};

struct TaskParams {
    int fp_frames = 1;       // FP/CFP: frames given at the clip start
    int fi_head = 1;         // FI: frames given at the start
    int fi_tail = 1;         // FI: frames given at the end
    double region_fh = 0.5;  // height fraction of rectangle/strip regions
    double region_fw = 0.5;  // width fraction
};

// Condition video: the source clip with everything outside the task's valid
// region replaced by the task's padding function. Valid pixels always equal
// the source pixels exactly.
struct ConditionVideo {
    VideoTensor video;
    PixelMask valid;
};

// Validates params against dims; throws UsageError naming the bad field.
void validate_task_params(TaskId task, const Dims3& dims, const TaskParams& params);

// Valid-region geometry alone (no pixel data needed).
PixelMask build_valid_mask(TaskId task, const Dims3& dims, const TaskParams& params);

// Builds the padded condition video. The label is only checked for presence:
// CG/CFP require one, every other task forbids one.
ConditionVideo build_condition(TaskId task, const VideoTensor& video, const TaskParams& params,
                               std::optional<ClassLabel> label = std::nullopt);

// Valid-pixel fraction of the task's mask, in [0, 1].
double condition_fraction(TaskId task, const Dims3& dims, const TaskParams& params);

// Left offset of the dynamic (OPD/IPD) window at frame f: linear sweep with
// rounding, flush-left at f=0 and flush-right at f=frames-1.
int dynamic_window_offset(int f, int frames, int width, int window_width);

} // namespace magvit
