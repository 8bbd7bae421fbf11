#include "qkd/rng.hpp"

namespace qkd {

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream_index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream_index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace qkd
