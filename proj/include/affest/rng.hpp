#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace affest {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). The
// output is a pure function of (key, counter), so any stream can be
// reconstructed from its identifiers without replaying other streams.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(Key key, Counter counter) : key_(key), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (index_ == 4) {
            buffer_ = block(counter_, key_);
            // Only word 0 advances: 2^32 blocks per (word1..3) prefix.
            ++counter_[0];
            index_ = 0;
        }
        return buffer_[index_++];
    }

    static Counter block(Counter ctr, Key key);

private:
    Key key_;
    Counter counter_;
    Counter buffer_{};
    int index_ = 4;
};

enum class Substream : std::uint32_t {
    YNoise = 0,
    XNoise = 1,
    Initial = 2,
};

// Identifies an independent random stream: the seed is the Philox key and
// the stream id occupies the upper counter words.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    Philox4x32 engine(Substream sub) const;
};

}  // namespace affest
