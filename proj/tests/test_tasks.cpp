#include <doctest.h>

#include <cmath>

#include "magvit/rng.hpp"
#include "magvit/tasks.hpp"

using namespace magvit;

namespace {

VideoTensor random_video(const Dims3& dims, std::uint64_t seed) {
    VideoTensor v(dims);
    Rng rng(seed);
    for (double& x : v.data) x = rng.next_unit();
    return v;
}

std::optional<ClassLabel> label_for(TaskId task) {
    if (task_needs_label(task)) return ClassLabel{0};
    return std::nullopt;
}

} // namespace

TEST_CASE("task names round-trip") {
    for (TaskId id : kAllTasks) CHECK(parse_task_id(task_name(id)) == id);
    CHECK_THROWS_AS(parse_task_id("XX"), UsageError);
}

TEST_CASE("FP: leading frames valid, last given frame replicated") {
    const Dims3 dims(16, 8, 8);
    VideoTensor video(dims, 0.0);
    TaskParams params;
    const ConditionVideo cond = build_condition(TaskId::FP, video, params);
    CHECK(condition_fraction(TaskId::FP, dims, params) == 0.0625);  // 1/16
    for (double v : cond.video.data) CHECK(v == 0.0);

    // Distinct frames: padding must replicate frame t-1.
    VideoTensor ramp(dims);
    for (int f = 0; f < 16; ++f)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) ramp.at(f, y, x) = f / 15.0;
    params.fp_frames = 3;
    const ConditionVideo c3 = build_condition(TaskId::FP, ramp, params);
    for (int f = 0; f < 16; ++f) {
        const double expect = std::min(f, 2) / 15.0;
        CHECK(c3.video.at(f, 4, 4) == expect);
        CHECK(c3.valid.at(f, 4, 4) == (f < 3));
    }
}

TEST_CASE("FI: linear interpolation between endpoint frames") {
    const Dims3 dims(16, 4, 4);
    VideoTensor video(dims, 0.0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) video.at(15, y, x) = 1.0;
    const ConditionVideo cond = build_condition(TaskId::FI, video, TaskParams{});
    for (int f = 1; f < 15; ++f)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x)
                CHECK(cond.video.at(f, y, x) == doctest::Approx(f / 15.0).epsilon(1e-13));

    // Random endpoints, wider gap: check the closed form per pixel.
    const Dims3 d2(10, 3, 3);
    VideoTensor r = random_video(d2, 5);
    TaskParams p2;
    p2.fi_head = 2;
    p2.fi_tail = 3;
    const ConditionVideo c2 = build_condition(TaskId::FI, r, p2);
    const double denom = 10 - 3 - 2 + 1;
    for (int f = 2; f < 7; ++f)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) {
                const double expect =
                    ((10 - 3 - f) * r.at(1, y, x) + (f - 2 + 1) * r.at(7, y, x)) / denom;
                CHECK(c2.video.at(f, y, x) == doctest::Approx(expect).epsilon(1e-12));
            }
}

TEST_CASE("OPC: centered rectangle with edge padding") {
    const Dims3 dims(16, 8, 8);
    const VideoTensor video = random_video(dims, 11);
    const ConditionVideo cond = build_condition(TaskId::OPC, video, TaskParams{});
    CHECK(condition_fraction(TaskId::OPC, dims, TaskParams{}) == 0.25);
    // Valid window is rows/cols [2,6); the corner clamps to (2,2).
    for (int f = 0; f < 16; ++f) {
        CHECK(cond.video.at(f, 0, 0) == video.at(f, 2, 2));
        CHECK(cond.video.at(f, 7, 7) == video.at(f, 5, 5));
        CHECK(cond.video.at(f, 0, 4) == video.at(f, 2, 4));
        CHECK(cond.video.at(f, 3, 3) == video.at(f, 3, 3));
    }
}

TEST_CASE("dynamic window sweeps flush-left to flush-right") {
    CHECK(dynamic_window_offset(0, 16, 16, 8) == 0);
    CHECK(dynamic_window_offset(15, 16, 16, 8) == 8);
    CHECK(dynamic_window_offset(7, 16, 16, 8) == 4);  // round(56/15)
    CHECK(dynamic_window_offset(0, 1, 16, 8) == 0);   // single frame: no sweep
}

TEST_CASE("OPD strip and IPD complement geometry") {
    const Dims3 dims(16, 8, 8);
    const TaskParams params;
    CHECK(condition_fraction(TaskId::OPD, dims, params) == 0.5);
    CHECK(condition_fraction(TaskId::IPD, dims, params) == 0.75);

    const PixelMask opd = build_valid_mask(TaskId::OPD, dims, params);
    for (int f = 0; f < 16; ++f) {
        const int off = dynamic_window_offset(f, 16, 8, 4);
        for (int x = 0; x < 8; ++x)
            CHECK(opd.at(f, 3, x) == (x >= off && x < off + 4));
    }

    // OPD pads with zeros outside the strip.
    VideoTensor ones(dims, 1.0);
    const ConditionVideo cond = build_condition(TaskId::OPD, ones, params);
    for (int f = 0; f < 16; ++f)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                CHECK(cond.video.at(f, y, x) == (cond.valid.at(f, y, x) ? 1.0 : 0.0));
}

TEST_CASE("strip fractions and complements") {
    const Dims3 dims(16, 8, 8);
    const TaskParams params;
    CHECK(condition_fraction(TaskId::OPV, dims, params) == 0.5);
    CHECK(condition_fraction(TaskId::OPH, dims, params) == 0.5);
    CHECK(condition_fraction(TaskId::IPC, dims, params) == 0.75);
    CHECK(condition_fraction(TaskId::CG, dims, params) == 0.0);

    const PixelMask opc = build_valid_mask(TaskId::OPC, dims, params);
    const PixelMask ipc = build_valid_mask(TaskId::IPC, dims, params);
    const PixelMask opv = build_valid_mask(TaskId::OPV, dims, params);
    const PixelMask oph = build_valid_mask(TaskId::OPH, dims, params);
    for (std::size_t i = 0; i < opc.data.size(); ++i) {
        CHECK(opc.data[i] != ipc.data[i]);  // exact complement
        CHECK((opv.data[i] && oph.data[i]) == static_cast<bool>(opc.data[i]));
    }
}

TEST_CASE("valid pixels equal the source and rebuilding is idempotent") {
    const Dims3 dims(8, 8, 8, 2);
    const VideoTensor video = random_video(dims, 3);
    TaskParams params;
    params.fp_frames = 2;
    for (TaskId task : kAllTasks) {
        const ConditionVideo cond = build_condition(task, video, params, label_for(task));
        for (int f = 0; f < dims.frames; ++f)
            for (int y = 0; y < dims.height; ++y)
                for (int x = 0; x < dims.width; ++x)
                    if (cond.valid.at(f, y, x))
                        for (int c = 0; c < dims.channels; ++c)
                            CHECK(cond.video.at(f, y, x, c) == video.at(f, y, x, c));

        const ConditionVideo again =
            build_condition(task, cond.video, params, label_for(task));
        CHECK(again.valid.data == cond.valid.data);
        for (int f = 0; f < dims.frames; ++f)
            for (int y = 0; y < dims.height; ++y)
                for (int x = 0; x < dims.width; ++x)
                    if (cond.valid.at(f, y, x))
                        for (int c = 0; c < dims.channels; ++c)
                            CHECK(again.video.at(f, y, x, c) == cond.video.at(f, y, x, c));
    }
}

TEST_CASE("condition_fraction matches a brute-force count for random params") {
    const Dims3 dims(12, 10, 20);
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        TaskParams params;
        params.fp_frames = 1 + static_cast<int>(rng.next_unit() * 10);
        params.fi_head = 1 + static_cast<int>(rng.next_unit() * 4);
        params.fi_tail = 1 + static_cast<int>(rng.next_unit() * 4);
        params.region_fh = (1 + static_cast<int>(rng.next_unit() * 9)) / 10.0;
        params.region_fw = (1 + static_cast<int>(rng.next_unit() * 19)) / 20.0;
        for (TaskId task : kAllTasks) {
            const PixelMask mask = build_valid_mask(task, dims, params);
            std::size_t count = 0;
            for (std::uint8_t v : mask.data) count += v;
            CHECK(condition_fraction(task, dims, params) ==
                  static_cast<double>(count) / dims.pixel_count());
        }
    }
}

TEST_CASE("FP and CFP produce identical conditions") {
    const Dims3 dims(8, 4, 4);
    const VideoTensor video = random_video(dims, 9);
    const ConditionVideo fp = build_condition(TaskId::FP, video, TaskParams{});
    const ConditionVideo cfp =
        build_condition(TaskId::CFP, video, TaskParams{}, ClassLabel{3});
    CHECK(fp.video.data == cfp.video.data);
    CHECK(fp.valid.data == cfp.valid.data);
}

TEST_CASE("label presence is enforced") {
    const VideoTensor video(Dims3(8, 4, 4));
    CHECK_THROWS_AS(build_condition(TaskId::CG, video, TaskParams{}), UsageError);
    CHECK_THROWS_AS(build_condition(TaskId::CFP, video, TaskParams{}), UsageError);
    CHECK_THROWS_AS(build_condition(TaskId::FP, video, TaskParams{}, ClassLabel{0}),
                    UsageError);
    CHECK_NOTHROW(build_condition(TaskId::CG, video, TaskParams{}, ClassLabel{0}));
}

TEST_CASE("parameter validation names the field") {
    const Dims3 dims(8, 10, 10);
    TaskParams params;
    params.fp_frames = 8;
    CHECK_THROWS_AS(build_valid_mask(TaskId::FP, dims, params), UsageError);
    params = TaskParams{};
    params.region_fh = 0.33;  // 0.33 * 10 is not integral
    CHECK_THROWS_AS(build_valid_mask(TaskId::OPC, dims, params), UsageError);
    params = TaskParams{};
    params.fi_head = 5;
    params.fi_tail = 4;
    CHECK_THROWS_AS(build_valid_mask(TaskId::FI, dims, params), UsageError);
}

TEST_CASE("CG condition is all padding") {
    const Dims3 dims(4, 4, 4);
    const VideoTensor video = random_video(dims, 21);
    const ConditionVideo cond = build_condition(TaskId::CG, video, TaskParams{}, ClassLabel{1});
    CHECK(cond.valid.valid_count() == 0);
    for (double v : cond.video.data) CHECK(v == 0.0);
}
