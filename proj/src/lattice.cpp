#include "magvit/lattice.hpp"

#include <numeric>
#include <string>

namespace magvit {

Dims3::Dims3(int t, int h, int w, int c) : frames(t), height(h), width(w), channels(c) {
    if (t <= 0 || h <= 0 || w <= 0 || c <= 0)
        throw DomainError("Dims3 axes must be strictly positive");
}

LatentDims::LatentDims(int t_, int h_, int w_) : t(t_), h(h_), w(w_) {
    if (t <= 0 || h <= 0 || w <= 0)
        throw DomainError("LatentDims axes must be strictly positive");
}

std::size_t PixelMask::valid_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += (v != 0);
    return n;
}

void require_divisible(const Dims3& dims, const LatentDims& latent) {
    if (dims.frames % latent.t != 0 || dims.height % latent.h != 0 ||
        dims.width % latent.w != 0)
        throw DomainError("pixel dims are not divisible by the token lattice");
}

Supervoxel supervoxel_of(const LatticeIdx& idx, const Dims3& dims, const LatentDims& latent) {
    require_divisible(dims, latent);
    if (idx.t < 0 || idx.t >= latent.t || idx.y < 0 || idx.y >= latent.h || idx.x < 0 ||
        idx.x >= latent.w)
        throw DomainError("lattice coordinate out of range");
    const int ft = dims.frames / latent.t;
    const int fy = dims.height / latent.h;
    const int fx = dims.width / latent.w;
    return Supervoxel{idx.t * ft, (idx.t + 1) * ft, idx.y * fy, (idx.y + 1) * fy,
                      idx.x * fx, (idx.x + 1) * fx};
}

std::size_t flatten(const LatticeIdx& idx, const LatentDims& latent) {
    if (idx.t < 0 || idx.t >= latent.t || idx.y < 0 || idx.y >= latent.h || idx.x < 0 ||
        idx.x >= latent.w)
        throw DomainError("lattice coordinate out of range");
    return (static_cast<std::size_t>(idx.t) * latent.h + idx.y) * latent.w + idx.x;
}

LatticeIdx unflatten(std::size_t i, const LatentDims& latent) {
    if (i >= latent.count()) throw DomainError("flat index out of range");
    const std::size_t hw = static_cast<std::size_t>(latent.h) * latent.w;
    LatticeIdx idx;
    idx.t = static_cast<int>(i / hw);
    idx.y = static_cast<int>((i % hw) / latent.w);
    idx.x = static_cast<int>(i % latent.w);
    return idx;
}

bool allpadded(const PixelMask& mask, const LatticeIdx& idx, const Dims3& dims,
               const LatentDims& latent) {
    if (!mask.dims.same_geometry(dims))
        throw DomainError("mask dims do not match video dims");
    const Supervoxel sv = supervoxel_of(idx, dims, latent);
    for (int f = sv.frame_begin; f < sv.frame_end; ++f)
        for (int y = sv.row_begin; y < sv.row_end; ++y)
            for (int x = sv.col_begin; x < sv.col_end; ++x)
                if (mask.at(f, y, x)) return false;
    return true;
}

double compression_rate(const Dims3& dims, const LatentDims& latent,
                        int bits_per_pixel_element, int bits_per_token) {
    require_divisible(dims, latent);
    if (bits_per_pixel_element <= 0 || bits_per_token <= 0)
        throw DomainError("bit widths must be positive");
    const double pixels_per_token =
        static_cast<double>(dims.pixel_count()) / static_cast<double>(latent.count());
    return pixels_per_token * bits_per_pixel_element / bits_per_token;
}

} // namespace magvit
