// Test double for the external scorer protocol.
//
//   stub_scorer <mode> [marker-file]
//
// modes: exact | chrf | srclen | reverse | short | dup | error | crash-once | crash-always | bad-hello | silent
//
// chrf is written from scratch here so it can cross-check the library's
// implementation; it shares no code with it.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "json.hpp"

using nlohmann::json;

namespace {

std::u32string utf8_to_u32(const std::string& s) {
  std::u32string out;
  for (std::size_t k = 0; k < s.size();) {
    const auto b = static_cast<unsigned char>(s[k]);
    int len = b < 0x80 ? 1 : b < 0xE0 ? 2 : b < 0xF0 ? 3 : 4;
    char32_t cp = len == 1 ? b : len == 2 ? b & 0x1F : len == 3 ? b & 0x0F : b & 0x07;
    for (int t = 1; t < len && k + t < s.size(); ++t) cp = (cp << 6) | (static_cast<unsigned char>(s[k + t]) & 0x3F);
    out += cp;
    k += len;
  }
  return out;
}

bool py_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || (c >= 0x1C && c <= 0x20) || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

double chrf(const std::string& hyp_s, const std::string& ref_s) {
  std::u32string hyp, ref;
  for (char32_t c : utf8_to_u32(hyp_s)) {
    if (!py_space(c)) hyp += c;
  }
  for (char32_t c : utf8_to_u32(ref_s)) {
    if (!py_space(c)) ref += c;
  }
  if (hyp.empty() && ref.empty()) return 100.0;
  double sum_p = 0, sum_r = 0;
  int used = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::map<std::u32string, long> h, r;
    for (std::size_t k = 0; k + n <= hyp.size(); ++k) ++h[hyp.substr(k, n)];
    for (std::size_t k = 0; k + n <= ref.size(); ++k) ++r[ref.substr(k, n)];
    long nh = 0, nr = 0, m = 0;
    for (auto& [g, c] : h) {
      nh += c;
      auto it = r.find(g);
      if (it != r.end()) m += std::min(c, it->second);
    }
    for (auto& [g, c] : r) nr += c;
    if (nh > 0 && nr > 0) {
      sum_p += static_cast<double>(m) / nh;
      sum_r += static_cast<double>(m) / nr;
      ++used;
    }
  }
  if (used == 0) return 0.0;
  const double p = sum_p / used, r = sum_r / used;
  if (p + r == 0) return 0.0;
  return 100.0 * 5.0 * p * r / (4.0 * p + r);
}

void send(const json& j) {
  std::cout << j.dump() << "\n" << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "exact";
  const std::string marker = argc > 2 ? argv[2] : "";
  std::string line;
  while (std::getline(std::cin, line)) {
    json msg;
    try {
      msg = json::parse(line);
    } catch (const json::exception&) {
      send({{"op", "error"}, {"msg", "malformed request"}});
      continue;
    }
    const std::string op = msg.value("op", "");
    if (op == "hello") {
      if (mode == "bad-hello") {
        send({{"op", "howdy"}});
      } else if (mode == "silent") {
        return 0;
      } else {
        send({{"op", "hello"}, {"name", "stub-" + mode}, {"proto", 1}});
      }
      continue;
    }
    if (op == "bye") return 0;
    if (op != "score") {
      send({{"op", "error"}, {"msg", "unknown op"}});
      continue;
    }
    if (mode == "crash-always") return 3;
    if (mode == "crash-once" && !std::filesystem::exists(marker)) {
      std::ofstream(marker) << "crashed\n";
      return 3;
    }
    if (mode == "error") {
      send({{"op", "error"}, {"id", msg["id"]}, {"msg", "plugin failed"}});
      continue;
    }
    json scores = json::array();
    for (const auto& item : msg["items"]) {
      const std::string hyp = item["hyp"], ref = item["ref"];
      double s = hyp == ref ? 100.0 : 0.0;
      if (mode == "chrf") s = chrf(hyp, ref);
      if (mode == "srclen") s = static_cast<double>(item["src"].get<std::string>().size());
      scores.push_back({{"i", item["i"]}, {"j", item["j"]}, {"s", s}});
    }
    if (mode == "reverse") std::reverse(scores.begin(), scores.end());
    if (mode == "short" && !scores.empty()) scores.erase(scores.end() - 1);
    if (mode == "dup" && scores.size() > 1) scores.back() = scores.front();
    send({{"op", "score"}, {"id", msg["id"]}, {"scores", scores}});
  }
  return 0;
}
