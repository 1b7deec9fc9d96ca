#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "mbrlab/mbr.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(MBRLAB_TEST_DATA_DIR); }

inline std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("mbrlab-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

  fs::path write(const std::string& name, const std::string& bytes) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << bytes;
    return p;
  }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Random sentence over words w0..w{vocab-1}.
inline std::string random_sentence(std::mt19937_64& rng, int vocab, int min_len, int max_len) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<int> word(0, vocab - 1);
  std::string out;
  const int n = len(rng);
  for (int k = 0; k < n; ++k) {
    if (k) out += ' ';
    out += "w" + std::to_string(word(rng));
  }
  return out;
}

// Raw (uncollapsed) sample list; duplicates are likely with a small vocabulary.
inline std::vector<mbrlab::Candidate> random_samples(std::mt19937_64& rng, int max_candidates, int vocab, int max_len) {
  std::uniform_int_distribution<int> count(1, max_candidates);
  std::uniform_real_distribution<double> lp(-30.0, -0.1);
  std::vector<mbrlab::Candidate> pool;
  std::vector<std::string> distinct;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    // reuse an earlier text about a third of the time
    std::string text;
    if (!distinct.empty() && rng() % 3 == 0) {
      text = distinct[rng() % distinct.size()];
    } else {
      text = random_sentence(rng, vocab, 1, max_len);
      distinct.push_back(text);
    }
    mbrlab::Candidate c;
    c.text = text;
    c.logp = lp(rng);
    pool.push_back(std::move(c));
  }
  // equal texts share one model score
  for (auto& c : pool) {
    for (const auto& d : pool) {
      if (d.text == c.text) {
        c.logp = d.logp;
        break;
      }
    }
  }
  return pool;
}

inline std::string candidates_jsonl(const std::string& seg_id, const std::vector<mbrlab::Candidate>& samples,
                                    const std::string& source = "") {
  nlohmann::json rec;
  rec["seg_id"] = seg_id;
  if (!source.empty()) rec["source"] = source;
  rec["candidates"] = nlohmann::json::array();
  for (const auto& c : samples) {
    nlohmann::json cand{{"text", c.text}};
    if (c.logp) cand["logp"] = *c.logp;
    for (std::uint32_t k = 0; k < c.count; ++k) rec["candidates"].push_back(cand);
  }
  return rec.dump() + "\n";
}

}  // namespace testsupport
