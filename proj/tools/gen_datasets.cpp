// Writes the bundled synthetic datasets (data/mushrooms.txt, data/w1a.txt).
// Both are generated from fixed seeds so the files are reproducible.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "sfw/rng.hpp"

namespace {

double normal(sfw::RngStream& rng) {
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t skewed_pick(sfw::RngStream& rng, const std::vector<double>& cdf) {
  const double u = rng.uniform() * cdf.back();
  return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

std::vector<double> zipf_cdf(std::size_t n, double s) {
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) cdf[i] = acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
  return cdf;
}

// One-hot encoded categorical records; the label follows a noisy linear rule
// dominated by one attribute.
void mushrooms(const std::string& path) {
  const std::vector<std::size_t> card = {6, 4, 10, 2, 9, 2, 2, 2, 12, 2, 5,
                                         4, 4, 9,  9, 1, 4, 3, 5, 9,  6, 7};
  const std::size_t rows = 8124;
  std::vector<std::size_t> offset(card.size());
  std::size_t dim = 0;
  for (std::size_t a = 0; a < card.size(); ++a) {
    offset[a] = dim;
    dim += card[a];
  }
  sfw::RngStream wr(2024, 0, 0);
  std::vector<double> w(dim);
  for (std::size_t a = 0; a < card.size(); ++a)
    for (std::size_t v = 0; v < card[a]; ++v)
      w[offset[a] + v] = normal(wr) * (a == 4 ? 3.0 : 0.6);

  std::ofstream out(path);
  sfw::RngStream rng(2024, 1, 0);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    double score = 0.0;
    std::vector<std::size_t> active;
    for (std::size_t a = 0; a < card.size(); ++a) {
      const std::size_t v = skewed_pick(rng, zipf_cdf(card[a], 0.8));
      active.push_back(offset[a] + v);
      score += w[offset[a] + v];
    }
    const bool label = score + 0.8 * normal(rng) > 0.0;
    pos += label;
    out << (label ? "+1" : "-1");
    for (std::size_t j : active) out << ' ' << j + 1 << ":1";
    out << '\n';
  }
  std::cerr << path << ": " << rows << " rows, dim " << dim << ", positive " << pos << "\n";
}

// Sparse binary bag-of-features rows with a rare positive class.
void w1a(const std::string& path) {
  const std::size_t rows = 2477, dim = 300;
  sfw::RngStream wr(2025, 0, 0);
  std::vector<double> w(dim);
  for (auto& v : w) v = normal(wr);
  std::vector<std::vector<std::size_t>> X(rows);
  std::vector<double> score(rows);
  sfw::RngStream rng(2025, 1, 0);
  const auto cdf = zipf_cdf(dim, 0.7);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t nnz = 6 + rng.uniform_index(12);
    std::vector<std::size_t> feats;
    while (feats.size() < nnz) {
      const std::size_t j = skewed_pick(rng, cdf);
      if (std::find(feats.begin(), feats.end(), j) == feats.end()) feats.push_back(j);
    }
    std::sort(feats.begin(), feats.end());
    double s = 0.0;
    for (std::size_t j : feats) s += w[j];
    X[i] = feats;
    score[i] = s + 0.5 * normal(rng);
  }
  std::vector<double> sorted = score;
  std::sort(sorted.begin(), sorted.end());
  const double thr = sorted[static_cast<std::size_t>(0.97 * static_cast<double>(rows))];
  std::ofstream out(path);
  std::size_t pos = 0, total = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const bool label = score[i] >= thr;
    pos += label;
    total += X[i].size();
    out << (label ? "+1" : "-1");
    for (std::size_t j : X[i]) out << ' ' << j + 1 << ":1";
    out << '\n';
  }
  std::cerr << path << ": " << rows << " rows, dim " << dim << ", positive " << pos
            << ", mean nnz " << static_cast<double>(total) / rows << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data";
  mushrooms(dir + "/mushrooms.txt");
  w1a(dir + "/w1a.txt");
  return 0;
}
