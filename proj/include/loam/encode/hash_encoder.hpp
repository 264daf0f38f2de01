#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace loam {

// Multi-segment hash encoding for identifier sets: each of n_segments
// independent seeded hash functions lights one position inside its own
// segment_width-wide slice, so a single id gets exactly n_segments ones and
// full-vector collisions need all segments to collide at once.
class HashEncoder {
public:
    HashEncoder(int n_segments, int segment_width, std::vector<std::uint64_t> seeds);

    // Derives the per-segment seeds from one master seed.
    static HashEncoder from_master_seed(int n_segments, int segment_width,
                                        std::uint64_t master_seed);

    int width() const { return n_segments_ * segment_width_; }
    int n_segments() const { return n_segments_; }
    int segment_width() const { return segment_width_; }
    const std::vector<std::uint64_t>& seeds() const { return seeds_; }

    // Union encoding of an identifier set; the empty set encodes to the
    // all-zero vector (documented sentinel, not an error).
    Eigen::VectorXd encode(std::span<const std::string> ids) const;

    // Writes the encoding into a pre-sized slice of a feature row.
    void encode_into(std::span<const std::string> ids, Eigen::Ref<Eigen::VectorXd> out) const;

private:
    int n_segments_;
    int segment_width_;
    std::vector<std::uint64_t> seeds_;
};

}  // namespace loam
