#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "phenonote/matrix.hpp"
#include "phenonote/rng.hpp"

namespace testutil {

inline std::filesystem::path data_dir() { return PHENONOTE_DATA_DIR; }

inline std::filesystem::path lexicon_path() { return data_dir() / "lexicon.txt"; }

/// Fresh empty directory under the build tree, one per test name.
inline std::filesystem::path scratch(std::string_view name) {
    const auto dir = std::filesystem::path(PHENONOTE_SCRATCH_DIR) / std::string(name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline phenonote::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                                       double hi = 1.0) {
    phenonote::Rng rng(seed);
    phenonote::Matrix m(rows, cols);
    for (double& v : m.data()) {
        v = rng.uniform(lo, hi);
    }
    return m;
}

}  // namespace testutil
