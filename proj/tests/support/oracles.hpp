#pragma once

// Straightforward reference implementations used as test oracles. They favour
// obviousness over speed and share no code with the library.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, std::vector<double>(c, 0.0)); }

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out = zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) out[j][i] = a[i][j];
  return out;
}

inline double frobenius_residual(const Matrix& v, const Matrix& w, const Matrix& h) {
  const Matrix wh = multiply(w, h);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v[0].size(); ++j) s += (v[i][j] - wh[i][j]) * (v[i][j] - wh[i][j]);
  return std::sqrt(s);
}

/// One Lee-Seung multiplicative step for ||V - WH||_F, H first.
inline void mu_step(const Matrix& v, Matrix& w, Matrix& h, double eps = 1e-12) {
  const Matrix wt = transpose(w);
  const Matrix num_h = multiply(wt, v);
  const Matrix den_h = multiply(multiply(wt, w), h);
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = 0; j < h[0].size(); ++j) h[i][j] *= num_h[i][j] / (den_h[i][j] + eps);
  const Matrix ht = transpose(h);
  const Matrix num_w = multiply(v, ht);
  const Matrix den_w = multiply(w, multiply(h, ht));
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w[0].size(); ++j) w[i][j] *= num_w[i][j] / (den_w[i][j] + eps);
}

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Rank = 1 + (# strictly smaller) + (# equal others) / 2.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) ++less;
      if (j != i && x[j] == x[i]) ++equal;
    }
    r[i] = 1.0 + less + equal / 2.0;
  }
  return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

inline double jsd_base2(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = (p[i] + q[i]) / 2.0;
    if (p[i] > 0) d += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0) d += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return d;
}

/// Lowercase tokens split on anything that is not an ASCII letter/digit or a
/// non-ASCII byte.
inline std::vector<std::string> simple_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline bool contains_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < phrase.size(); ++j) all = all && tokens[i + j] == phrase[j];
    if (all) return true;
  }
  return false;
}

struct Edge {
  std::string a, b;
  std::size_t count = 0;
  double pmi = 0.0;
};

/// Per node, sort incident edges by (pmi desc, count desc, pair asc) and keep
/// the first k; return the union as sorted pairs.
inline std::set<std::pair<std::string, std::string>> backbone(const std::vector<Edge>& edges, std::size_t k) {
  std::set<std::string> nodes;
  for (const auto& e : edges) {
    nodes.insert(e.a);
    nodes.insert(e.b);
  }
  std::set<std::pair<std::string, std::string>> kept;
  for (const auto& n : nodes) {
    std::vector<Edge> inc;
    for (const auto& e : edges)
      if (e.a == n || e.b == n) inc.push_back(e);
    std::sort(inc.begin(), inc.end(), [](const Edge& x, const Edge& y) {
      if (x.pmi != y.pmi) return x.pmi > y.pmi;
      if (x.count != y.count) return x.count > y.count;
      return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    for (std::size_t i = 0; i < std::min(k, inc.size()); ++i) kept.emplace(inc[i].a, inc[i].b);
  }
  return kept;
}

}  // namespace oracle
