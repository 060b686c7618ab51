#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace oinfo {

/// Deterministic random stream. Identical (seed, stream id) pairs produce
/// identical draw sequences; distinct stream ids are decorrelated through
/// a splitmix64 mix of both values.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// A child stream whose seed derives from this stream's identity and `id`.
    RngStream substream(std::uint64_t id) const;

    double normal();
    double uniform();  // [0, 1)
    std::uint64_t uniform_index(std::uint64_t n);  // [0, n)

    /// rows x cols matrix of independent standard normal draws, filled column by column.
    template <typename Derived>
    void fill_normal(Eigen::MatrixBase<Derived>& out) {
        for (Eigen::Index c = 0; c < out.cols(); ++c)
            for (Eigen::Index r = 0; r < out.rows(); ++r)
                out(r, c) = static_cast<typename Derived::Scalar>(normal());
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace oinfo
