#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "magvit/lattice.hpp"
#include "magvit/tasks.hpp"

namespace magvit {

using TokenId = std::uint32_t;

// K-means codebook over flattened supervoxel vectors. The vector for a token
// position concatenates its supervoxel's pixels in row-major order (frames,
// rows, columns, channels), so dim = (T/t)*(H/h)*(W/w)*C.
struct Codebook {
    std::size_t dim = 0;
    std::vector<double> centroids;  // size() x dim, row-major

    std::size_t size() const { return dim == 0 ? 0 : centroids.size() / dim; }
    std::span<const double> centroid(std::size_t i) const {
        return {centroids.data() + i * dim, dim};
    }
};

struct TokenLattice {
    LatentDims latent;
    std::vector<TokenId> tokens;  // length latent.count(), raster order

    bool operator==(const TokenLattice& o) const {
        return latent == o.latent && tokens == o.tokens;
    }
};

// Tokenized condition video plus the per-position allpadded predicate.
struct ConditionTokens {
    TokenLattice tokens;
    std::vector<std::uint8_t> allpadded;  // length latent.count()
};

struct FitConfig {
    std::size_t size = 64;       // codebook entries
    int max_iters = 50;
    std::uint64_t seed = 0;
};

// Extracts the supervoxel vector for one lattice position.
std::vector<double> supervoxel_vector(const VideoTensor& video, const LatticeIdx& idx,
                                      const LatentDims& latent);

// Seeded k-means over every supervoxel vector in the corpus: k-means++ style
// init, Lloyd iterations up to the cap, empty clusters reseeded to the point
// farthest from its assigned centroid. Deterministic given the seed. Throws
// ConfigError when the corpus has fewer than `size` distinct vectors.
Codebook fit_codebook(const std::vector<VideoTensor>& corpus, const LatentDims& latent,
                      const FitConfig& cfg);

// Nearest centroid per supervoxel (Euclidean; ties resolve to the lowest
// index). Strictly local: token i depends only on supervoxel i's pixels.
TokenLattice encode(const VideoTensor& video, const Codebook& codebook,
                    const LatentDims& latent);

// Writes each token's centroid back into its supervoxel.
VideoTensor decode(const TokenLattice& tokens, const Codebook& codebook, const Dims3& dims);

ConditionTokens encode_condition(const ConditionVideo& cond, const Codebook& codebook,
                                 const LatentDims& latent);

enum class InflateMode { central, average };

// Expands a 2D kernel to depth slices, for seeding 3D convolution weights
// from 2D ones. central: the middle slice holds the 2D kernel, all others are
// zero (depth must be odd). average: every slice holds kernel/depth. The
// convolution stacks these weights target conventionally use reflect rather
// than zero padding; that is a convention of the consumer, not of this
// helper, and no convolution layers exist in this toolkit.
std::vector<double> inflate_kernel(const std::vector<double>& kernel2d, int kh, int kw,
                                   int depth, InflateMode mode);

inline constexpr double kPsnrCap = 99.0;

// 10*log10(1/MSE) with unit peak, clamped to the cap (identical inputs report
// the cap instead of infinity).
double psnr(const VideoTensor& a, const VideoTensor& b, double cap = kPsnrCap);

// Codebook file ("MGCB"): magic, version u8, |Z| u32, dim u32, centroids as
// little-endian f32.
void save_codebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

} // namespace magvit
