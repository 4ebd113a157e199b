#pragma once

// Counter-based random numbers (Philox4x32-10). Each trajectory owns an
// independent stream keyed by its 64-bit seed; draws are a pure function of
// (key, counter), so parallel ensembles are reproducible regardless of
// scheduling.

#include <array>
#include <cstdint>

namespace nrb {

struct Philox4x32 {
    static constexpr uint32_t M0 = 0xD2511F53u;
    static constexpr uint32_t M1 = 0xCD9E8D57u;
    static constexpr uint32_t W0 = 0x9E3779B9u;
    static constexpr uint32_t W1 = 0xBB67AE85u;

    static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            uint64_t p0 = uint64_t(M0) * ctr[0];
            uint64_t p1 = uint64_t(M1) * ctr[2];
            uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
            uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

class CounterRng {
  public:
    explicit CounterRng(uint64_t seed) : key_{uint32_t(seed), uint32_t(seed >> 32)} {}

    // uniform double in [0, 1) with 53 random bits
    double uniform() {
        uint64_t bits = (uint64_t(next_u32()) << 32) | next_u32();
        return double(bits >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1]; handy for -log(u) draws
    double uniform_open0() { return 1.0 - uniform(); }

    uint64_t uniform_u64() { return (uint64_t(next_u32()) << 32) | next_u32(); }

    // index in [0, n)
    size_t uniform_index(size_t n) {
        return n == 0 ? 0 : size_t(uniform() * double(n)) % n;
    }

    uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = Philox4x32::block({uint32_t(counter_), uint32_t(counter_ >> 32), 0u, 0u}, key_);
            ++counter_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

  private:
    std::array<uint32_t, 2> key_;
    uint64_t counter_ = 0;
    std::array<uint32_t, 4> buf_{};
    int pos_ = 4;
};

} // namespace nrb
