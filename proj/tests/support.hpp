// Shared helpers for the test binaries: temp dirs, fixture access, and
// seeded random generators for the property tests.
#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "raglab/types.hpp"

namespace raglab::testing {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return fs::path(RAGLAB_FIXTURE_DIR); }
inline fs::path desk_dir() { return fixture_dir() / "desk"; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("raglab-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Small vocabulary with deliberate case and punctuation variants so that
// normalization matters.
class WordGen {
 public:
  explicit WordGen(std::uint64_t seed) : rng_(seed) {}

  std::string word() {
    static const std::vector<std::string> vocab = {
        "alpha", "Beta", "gamma", "DELTA", "river", "stone", "harbour", "ferry",
        "lamp",  "tower", "north", "Fenn",  "Orrin", "slate", "bell",   "x"};
    return vocab[pick(vocab.size())];
  }

  std::string sentence(std::size_t max_words) {
    static const std::vector<std::string> seps = {" ", " ", " ", ", ", " - ", "  ", ". "};
    const auto n = pick(max_words + 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += seps[pick(seps.size())];
      out += word();
    }
    return out;
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  bool coin() { return pick(2) == 1; }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline OutcomeLabel random_label(WordGen& g) { return kAllLabels[g.pick(kLabelCount)]; }

}  // namespace raglab::testing
