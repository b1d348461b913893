#ifndef SREG_RNG_HPP
#define SREG_RNG_HPP

#include <cstdint>
#include <limits>

namespace sreg {

// Counter-based generator (Philox 4x64, 10 rounds). Compared to the usual
// stateful engines this gives two things the ensemble code needs: cheap
// jump-free substreams (trial t of a run uses stream(seed, t), so results do
// not depend on scheduling or trial order) and exact reproducibility of every
// documented experiment from a single 64-bit seed.
class philox4x64 {
public:
    using result_type = std::uint64_t;

    philox4x64() : philox4x64(0, 0) {}

    explicit philox4x64(std::uint64_t seed, std::uint64_t stream = 0) {
        key_[0] = seed;
        key_[1] = 0;
        ctr_[0] = 0;
        ctr_[1] = 0;
        ctr_[2] = stream;
        ctr_[3] = 0;
        buf_pos_ = 4;
    }

    // Substream derivation: same key, stream index planted in counter word 2.
    // A carry only reaches that word after 2^128 blocks, so distinct streams
    // are disjoint counter ranges in practice, hence independent blocks.
    static philox4x64 stream(std::uint64_t seed, std::uint64_t stream_index) {
        return philox4x64(seed, stream_index);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() {
        if (buf_pos_ == 4) {
            fill_block();
        }
        return buf_[buf_pos_++];
    }

    // Uniform in [0, bound) without modulo bias (Lemire's method).
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound < 2) return 0;
        while (true) {
            std::uint64_t x = (*this)();
            __uint128_t m = static_cast<__uint128_t>(x) * bound;
            auto lo = static_cast<std::uint64_t>(m);
            if (lo >= bound || lo >= (0 - bound) % bound) {
                return static_cast<std::uint64_t>(m >> 64);
            }
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform_double() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    template <typename It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            std::uint64_t j = uniform_below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static void mul_hilo(std::uint64_t a, std::uint64_t b,
                         std::uint64_t& hi, std::uint64_t& lo) {
        __uint128_t p = static_cast<__uint128_t>(a) * b;
        hi = static_cast<std::uint64_t>(p >> 64);
        lo = static_cast<std::uint64_t>(p);
    }

    void fill_block() {
        // the counter advances before the block is produced, so block t is
        // keyed by counter value t+1; carries ripple through all four words
        if (++ctr_[0] == 0 && ++ctr_[1] == 0 && ++ctr_[2] == 0) {
            ++ctr_[3];
        }
        std::uint64_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
        std::uint64_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint64_t hi0, lo0, hi1, lo1;
            mul_hilo(kMul0, c0, hi0, lo0);
            mul_hilo(kMul1, c2, hi1, lo1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        buf_[0] = c0;
        buf_[1] = c1;
        buf_[2] = c2;
        buf_[3] = c3;
        buf_pos_ = 0;
    }

    std::uint64_t key_[2];
    std::uint64_t ctr_[4];
    std::uint64_t buf_[4];
    int buf_pos_;
};

}  // namespace sreg

#endif
