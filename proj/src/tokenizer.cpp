#include "magvit/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "magvit/binio.hpp"
#include "magvit/kernels.hpp"
#include "magvit/rng.hpp"

namespace magvit {

std::vector<double> supervoxel_vector(const VideoTensor& video, const LatticeIdx& idx,
                                      const LatentDims& latent) {
    const Supervoxel sv = supervoxel_of(idx, video.dims, latent);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(sv.frame_end - sv.frame_begin) *
                (sv.row_end - sv.row_begin) * (sv.col_end - sv.col_begin) *
                video.dims.channels);
    for (int f = sv.frame_begin; f < sv.frame_end; ++f)
        for (int y = sv.row_begin; y < sv.row_end; ++y)
            for (int x = sv.col_begin; x < sv.col_end; ++x)
                for (int c = 0; c < video.dims.channels; ++c)
                    out.push_back(video.at(f, y, x, c));
    return out;
}

namespace {

// All supervoxel vectors of a corpus, flattened into rows.
struct VectorPool {
    std::size_t dim = 0;
    std::size_t count = 0;
    std::vector<double> rows;

    const double* row(std::size_t i) const { return rows.data() + i * dim; }
};

VectorPool collect_vectors(const std::vector<VideoTensor>& corpus, const LatentDims& latent) {
    VectorPool pool;
    for (const VideoTensor& video : corpus) {
        require_divisible(video.dims, latent);
        for (std::size_t i = 0; i < latent.count(); ++i) {
            std::vector<double> v = supervoxel_vector(video, unflatten(i, latent), latent);
            if (pool.dim == 0) pool.dim = v.size();
            if (v.size() != pool.dim)
                throw ConfigError("corpus clips have inconsistent supervoxel shapes");
            pool.rows.insert(pool.rows.end(), v.begin(), v.end());
            ++pool.count;
        }
    }
    return pool;
}

} // namespace

Codebook fit_codebook(const std::vector<VideoTensor>& corpus, const LatentDims& latent,
                      const FitConfig& cfg) {
    if (cfg.size < 2) throw ConfigError("codebook size must be at least 2");
    const VectorPool pool = collect_vectors(corpus, latent);
    const std::size_t k = cfg.size;
    if (pool.count < k)
        throw ConfigError("corpus has fewer supervoxel vectors than codebook entries");
    const std::size_t d = pool.dim;

    Rng rng(hash_combine(cfg.seed, 0x6b6d65616e73ull));

    // k-means++ init: first center uniform, then proportional to squared
    // distance from the chosen set. Zero total mass means fewer distinct
    // vectors than centers.
    std::vector<double> centers(k * d);
    std::vector<double> dist2(pool.count, std::numeric_limits<double>::infinity());
    {
        const std::size_t first = static_cast<std::size_t>(rng.next_unit() * pool.count);
        std::copy_n(pool.row(first), d, centers.begin());
        for (std::size_t i = 0; i < pool.count; ++i)
            dist2[i] = kernels::l2sq(pool.row(i), centers.data(), d);
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (double v : dist2) total += v;
            if (total <= 0.0)
                throw ConfigError("corpus has fewer distinct supervoxel vectors than "
                                  "codebook entries");
            double target = rng.next_unit() * total;
            std::size_t pick = pool.count - 1;
            for (std::size_t i = 0; i < pool.count; ++i) {
                target -= dist2[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
            // A zero-distance pick duplicates an existing center; move to the
            // next point with positive mass.
            while (dist2[pick] <= 0.0) pick = (pick + 1) % pool.count;
            double* dst = centers.data() + c * d;
            std::copy_n(pool.row(pick), d, dst);
            for (std::size_t i = 0; i < pool.count; ++i)
                dist2[i] = std::min(dist2[i], kernels::l2sq(pool.row(i), dst, d));
        }
    }

    std::vector<std::size_t> assign(pool.count, 0);
    std::vector<std::size_t> sizes(k, 0);
    std::vector<double> sums(k * d, 0.0);

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        bool changed = false;
        std::fill(sizes.begin(), sizes.end(), 0);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t i = 0; i < pool.count; ++i) {
            const auto [best, best_d] = kernels::nearest_centroid(pool.row(i), centers.data(),
                                                                  k, d);
            if (best != assign[i]) {
                assign[i] = best;
                changed = true;
            }
            dist2[i] = best_d;
            ++sizes[best];
            kernels::axpy(1.0, pool.row(i), sums.data() + best * d, d);
        }

        // Reseed each empty cluster to the point farthest from its centroid
        // (ties to the lowest index), then rebuild that point's membership.
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < pool.count; ++i)
                if (sizes[assign[i]] > 1 && dist2[i] > far_d) {
                    far_d = dist2[i];
                    far = i;
                }
            const std::size_t old = assign[far];
            --sizes[old];
            kernels::axpy(-1.0, pool.row(far), sums.data() + old * d, d);
            assign[far] = c;
            sizes[c] = 1;
            std::copy_n(pool.row(far), d, sums.begin() + c * d);
            dist2[far] = 0.0;
            changed = true;
        }

        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < d; ++j)
                centers[c * d + j] = sums[c * d + j] / static_cast<double>(sizes[c]);

        if (!changed) break;
    }

    Codebook cb;
    cb.dim = d;
    cb.centroids = std::move(centers);
    return cb;
}

TokenLattice encode(const VideoTensor& video, const Codebook& codebook,
                    const LatentDims& latent) {
    require_divisible(video.dims, latent);
    TokenLattice out;
    out.latent = latent;
    out.tokens.resize(latent.count());
    for (std::size_t i = 0; i < latent.count(); ++i) {
        const std::vector<double> v = supervoxel_vector(video, unflatten(i, latent), latent);
        if (v.size() != codebook.dim)
            throw DomainError("supervoxel dim does not match codebook dim");
        out.tokens[i] = static_cast<TokenId>(
            kernels::nearest_centroid(v.data(), codebook.centroids.data(), codebook.size(),
                                      codebook.dim)
                .first);
    }
    return out;
}

VideoTensor decode(const TokenLattice& tokens, const Codebook& codebook, const Dims3& dims) {
    require_divisible(dims, tokens.latent);
    if (tokens.tokens.size() != tokens.latent.count())
        throw DomainError("token count does not match latent dims");
    VideoTensor out(dims);
    for (std::size_t i = 0; i < tokens.tokens.size(); ++i) {
        const TokenId id = tokens.tokens[i];
        if (id >= codebook.size()) throw DataError("token id out of codebook range");
        const Supervoxel sv = supervoxel_of(unflatten(i, tokens.latent), dims, tokens.latent);
        std::span<const double> c = codebook.centroid(id);
        std::size_t j = 0;
        for (int f = sv.frame_begin; f < sv.frame_end; ++f)
            for (int y = sv.row_begin; y < sv.row_end; ++y)
                for (int x = sv.col_begin; x < sv.col_end; ++x)
                    for (int ch = 0; ch < dims.channels; ++ch) out.at(f, y, x, ch) = c[j++];
    }
    return out;
}

ConditionTokens encode_condition(const ConditionVideo& cond, const Codebook& codebook,
                                 const LatentDims& latent) {
    ConditionTokens out;
    out.tokens = encode(cond.video, codebook, latent);
    out.allpadded.resize(latent.count());
    for (std::size_t i = 0; i < latent.count(); ++i)
        out.allpadded[i] =
            allpadded(cond.valid, unflatten(i, latent), cond.video.dims, latent) ? 1 : 0;
    return out;
}

std::vector<double> inflate_kernel(const std::vector<double>& kernel2d, int kh, int kw,
                                   int depth, InflateMode mode) {
    if (kh <= 0 || kw <= 0 || depth <= 0) throw DomainError("kernel extents must be positive");
    if (kernel2d.size() != static_cast<std::size_t>(kh) * kw)
        throw DomainError("2D kernel size does not match kh*kw");
    if (mode == InflateMode::central && depth % 2 == 0)
        throw UsageError("central inflation requires an odd depth");

    std::vector<double> out(static_cast<std::size_t>(depth) * kh * kw, 0.0);
    if (mode == InflateMode::central) {
        const int mid = depth / 2;
        std::copy(kernel2d.begin(), kernel2d.end(),
                  out.begin() + static_cast<std::size_t>(mid) * kh * kw);
    } else {
        for (int s = 0; s < depth; ++s)
            for (std::size_t j = 0; j < kernel2d.size(); ++j)
                out[static_cast<std::size_t>(s) * kh * kw + j] = kernel2d[j] / depth;
    }
    return out;
}

double psnr(const VideoTensor& a, const VideoTensor& b, double cap) {
    if (!(a.dims == b.dims)) throw DomainError("psnr requires equal dims");
    const double sq = kernels::l2sq(a.data.data(), b.data.data(), a.data.size());
    const double mse = sq / static_cast<double>(a.data.size());
    if (mse <= 0.0) return cap;
    return std::min(cap, 10.0 * std::log10(1.0 / mse));
}

void save_codebook(const Codebook& codebook, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open codebook file for writing: " + path.string());
    binio::put_magic(os, "MGCB");
    binio::put_u8(os, 1);
    binio::put_u32(os, static_cast<std::uint32_t>(codebook.size()));
    binio::put_u32(os, static_cast<std::uint32_t>(codebook.dim));
    for (double v : codebook.centroids) binio::put_f32(os, static_cast<float>(v));
    if (!os) throw IoError("failed writing codebook file: " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open codebook file: " + path.string());
    binio::expect_magic(is, "MGCB", "codebook");
    const std::uint8_t version = binio::get_u8(is, "codebook version");
    if (version != 1) throw DataError("unsupported codebook version");
    const std::uint32_t size = binio::get_u32(is, "codebook size");
    const std::uint32_t dim = binio::get_u32(is, "codebook dim");
    if (size < 2 || dim == 0) throw DataError("degenerate codebook header");
    Codebook cb;
    cb.dim = dim;
    cb.centroids.resize(static_cast<std::size_t>(size) * dim);
    for (double& v : cb.centroids) {
        const float f = binio::get_f32(is, "codebook centroid");
        if (!std::isfinite(f)) throw DataError("non-finite centroid in codebook file");
        v = f;
    }
    return cb;
}

} // namespace magvit
