#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "magvit/errors.hpp"

namespace magvit {

// Pixel-space shape of a clip: T frames of H x W pixels with C channels.
struct Dims3 {
    int frames = 0;
    int height = 0;
    int width = 0;
    int channels = 1;

    Dims3() = default;
    Dims3(int t, int h, int w, int c = 1);

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(frames) * height * width;
    }
    std::size_t value_count() const { return pixel_count() * channels; }

    bool same_geometry(const Dims3& o) const {
        return frames == o.frames && height == o.height && width == o.width;
    }
    bool operator==(const Dims3& o) const {
        return same_geometry(o) && channels == o.channels;
    }
};

// Token-lattice shape t x h x w. Each lattice axis must divide the paired
// pixel axis exactly; non-divisible shapes are rejected, not padded.
struct LatentDims {
    int t = 0;
    int h = 0;
    int w = 0;

    LatentDims() = default;
    LatentDims(int t_, int h_, int w_);

    std::size_t count() const { return static_cast<std::size_t>(t) * h * w; }

    bool operator==(const LatentDims& o) const { return t == o.t && h == o.h && w == o.w; }
};

// Lattice coordinate: temporal slice, row, column.
struct LatticeIdx {
    int t = 0;
    int y = 0;
    int x = 0;

    bool operator==(const LatticeIdx& o) const { return t == o.t && y == o.y && x == o.x; }
};

// Dense pixel tensor, row-major with frames outermost and channels innermost.
// Values are reals in [0, 1].
struct VideoTensor {
    Dims3 dims;
    std::vector<double> data;

    VideoTensor() = default;
    explicit VideoTensor(const Dims3& d, double fill = 0.0)
        : dims(d), data(d.value_count(), fill) {}

    std::size_t offset(int f, int y, int x, int c = 0) const {
        return ((static_cast<std::size_t>(f) * dims.height + y) * dims.width + x) *
                   dims.channels + c;
    }
    double& at(int f, int y, int x, int c = 0) { return data[offset(f, y, x, c)]; }
    double at(int f, int y, int x, int c = 0) const { return data[offset(f, y, x, c)]; }
};

// Per-pixel validity mask (channel-free: one flag per T*H*W pixel).
struct PixelMask {
    Dims3 dims;
    std::vector<std::uint8_t> data;

    PixelMask() = default;
    explicit PixelMask(const Dims3& d, bool fill = false)
        : dims(d), data(d.pixel_count(), fill ? 1 : 0) {}

    std::size_t offset(int f, int y, int x) const {
        return (static_cast<std::size_t>(f) * dims.height + y) * dims.width + x;
    }
    bool at(int f, int y, int x) const { return data[offset(f, y, x)] != 0; }
    void set(int f, int y, int x, bool v) { data[offset(f, y, x)] = v ? 1 : 0; }

    std::size_t valid_count() const;
};

// Axis-aligned pixel block owned by one token position; half-open ranges.
struct Supervoxel {
    int frame_begin = 0, frame_end = 0;
    int row_begin = 0, row_end = 0;
    int col_begin = 0, col_end = 0;
};

// Throws DomainError unless every lattice axis divides the pixel axis.
void require_divisible(const Dims3& dims, const LatentDims& latent);

Supervoxel supervoxel_of(const LatticeIdx& idx, const Dims3& dims, const LatentDims& latent);

// Raster order: temporal slice outermost, column innermost.
std::size_t flatten(const LatticeIdx& idx, const LatentDims& latent);
LatticeIdx unflatten(std::size_t i, const LatentDims& latent);

// True iff every pixel of idx's supervoxel is invalid in the mask, i.e. the
// block holds nothing but padding.
bool allpadded(const PixelMask& mask, const LatticeIdx& idx, const Dims3& dims,
               const LatentDims& latent);

// (pixels per token) * bits_per_pixel_element / bits_per_token, where
// bits_per_pixel_element counts all channels of one pixel.
double compression_rate(const Dims3& dims, const LatentDims& latent,
                        int bits_per_pixel_element, int bits_per_token);

} // namespace magvit
