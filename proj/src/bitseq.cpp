#include "bitwords/bitseq.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "bitwords/errors.hpp"

namespace bitwords {

void BitSequence::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    unsigned char header[8];
    for (int i = 0; i < 8; ++i) header[i] = static_cast<unsigned char>(size_ >> (8 * i));
    out.write(reinterpret_cast<const char*>(header), 8);
    const std::uint64_t n_bytes = (size_ + 7) / 8;
    std::vector<unsigned char> bytes(n_bytes, 0);
    for (std::uint64_t b = 0; b < n_bytes; ++b) {
        const std::uint64_t word = words_[b >> 3];
        bytes[b] = static_cast<unsigned char>(word >> (8 * (b & 7)));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(n_bytes));
    if (!out) throw ValidationError("short write: " + path);
}

BitSequence BitSequence::read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open for reading: " + path);
    unsigned char header[8];
    in.read(reinterpret_cast<char*>(header), 8);
    if (in.gcount() != 8) throw ValidationError("truncated header: " + path);
    std::uint64_t n_bits = 0;
    for (int i = 0; i < 8; ++i) n_bits |= static_cast<std::uint64_t>(header[i]) << (8 * i);

    const std::uint64_t n_bytes = (n_bits + 7) / 8;
    std::vector<unsigned char> bytes(n_bytes);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n_bytes));
    if (static_cast<std::uint64_t>(in.gcount()) != n_bytes)
        throw ValidationError("truncated payload: " + path);

    BitSequence seq(n_bits);
    for (std::uint64_t b = 0; b < n_bytes; ++b)
        seq.words_[b >> 3] |= static_cast<std::uint64_t>(bytes[b]) << (8 * (b & 7));
    if (n_bits % 8 != 0) {
        const unsigned char pad = static_cast<unsigned char>(bytes[n_bytes - 1] >> (n_bits % 8));
        if (pad != 0) throw ValidationError("nonzero padding bits: " + path);
    }
    return seq;
}

Word make_word(std::uint64_t value, int width) {
    if (width < 1 || width > 64)
        throw ValidationError("word width must lie in [1,64]");
    if (width < 64 && (value >> width) != 0)
        throw ValidationError("word value has bits beyond its width");
    return Word{value, width, std::popcount(value)};
}

}  // namespace bitwords
