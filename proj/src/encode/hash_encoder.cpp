#include "loam/encode/hash_encoder.hpp"

#include "loam/util/errors.hpp"
#include "loam/util/hashing.hpp"
#include "loam/util/rng.hpp"

namespace loam {

HashEncoder::HashEncoder(int n_segments, int segment_width, std::vector<std::uint64_t> seeds)
    : n_segments_(n_segments), segment_width_(segment_width), seeds_(std::move(seeds)) {
    if (n_segments_ < 1 || segment_width_ < 1) {
        throw ConfigError("HashEncoder: segments and width must be positive");
    }
    if (seeds_.size() != static_cast<std::size_t>(n_segments_)) {
        throw ConfigError("HashEncoder: need one seed per segment");
    }
}

HashEncoder HashEncoder::from_master_seed(int n_segments, int segment_width,
                                          std::uint64_t master_seed) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(n_segments));
    for (int i = 0; i < n_segments; ++i) {
        seeds.push_back(derive_seed(master_seed, "hash_segment", static_cast<std::uint64_t>(i)));
    }
    return HashEncoder(n_segments, segment_width, std::move(seeds));
}

void HashEncoder::encode_into(std::span<const std::string> ids,
                              Eigen::Ref<Eigen::VectorXd> out) const {
    if (out.size() != width()) throw ArgumentError("HashEncoder::encode_into: slice size mismatch");
    out.setZero();
    for (const auto& id : ids) {
        for (int s = 0; s < n_segments_; ++s) {
            const auto pos = hash64(id, seeds_[static_cast<std::size_t>(s)]) %
                             static_cast<std::uint64_t>(segment_width_);
            out[s * segment_width_ + static_cast<int>(pos)] = 1.0;
        }
    }
}

Eigen::VectorXd HashEncoder::encode(std::span<const std::string> ids) const {
    Eigen::VectorXd out(width());
    encode_into(ids, out);
    return out;
}

}  // namespace loam
