// Independent reference computations used only by tests. Nothing here calls
// into the aggregation code it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Order = std::vector<std::string>;
using Counts = std::map<std::pair<std::string, std::string>, int>;

// d[x][y] by scanning every ballot and every ordered pair of positions.
inline Counts count_preferences(const std::vector<Order>& ballots) {
  Counts d;
  for (const auto& b : ballots) {
    for (const auto& x : b) {
      for (const auto& y : b) {
        if (x == y) continue;
        auto px = std::find(b.begin(), b.end(), x) - b.begin();
        auto py = std::find(b.begin(), b.end(), y) - b.begin();
        if (px < py) ++d[{x, y}];
      }
    }
  }
  return d;
}

inline int get(const Counts& d, const std::string& x, const std::string& y) {
  auto it = d.find({x, y});
  return it == d.end() ? 0 : it->second;
}

// Widest beat path by enumerating every simple path (winning-votes links).
inline Counts brute_force_paths(const Order& pool, const Counts& d, bool margins = false) {
  auto link = [&](const std::string& a, const std::string& b) {
    int ab = get(d, a, b), ba = get(d, b, a);
    if (ab <= ba) return 0;
    return margins ? ab - ba : ab;
  };
  Counts p;
  for (const auto& src : pool) {
    for (const auto& dst : pool) {
      if (src == dst) continue;
      int best = 0;
      std::vector<std::string> path{src};
      std::function<void(const std::string&, int)> dfs = [&](const std::string& at, int width) {
        for (const auto& next : pool) {
          if (std::find(path.begin(), path.end(), next) != path.end()) continue;
          int l = link(at, next);
          if (l == 0) continue;
          int w = std::min(width, l);
          if (next == dst) {
            best = std::max(best, w);
            continue;
          }
          path.push_back(next);
          dfs(next, w);
          path.pop_back();
        }
      };
      dfs(src, 1 << 30);
      p[{src, dst}] = best;
    }
  }
  return p;
}

// Unbeaten candidates, then most candidates beaten, then smallest id.
inline std::string schulze_winner(const Order& pool, const Counts& p) {
  std::string best;
  int best_beats = -1;
  for (const auto& w : pool) {
    bool unbeaten = true;
    int beats = 0;
    for (const auto& y : pool) {
      if (y == w) continue;
      if (get(p, w, y) < get(p, y, w)) unbeaten = false;
      if (get(p, w, y) > get(p, y, w)) ++beats;
    }
    if (!unbeaten) continue;
    if (beats > best_beats || (beats == best_beats && w < best)) {
      best = w;
      best_beats = beats;
    }
  }
  return best;
}

// Regularized BT log-likelihood over explicit log-strengths.
inline double bt_loglik(const std::vector<std::vector<double>>& w, double c,
                        const std::vector<double>& theta) {
  double ll = 0;
  for (size_t i = 0; i < theta.size(); ++i) {
    for (size_t j = 0; j < theta.size(); ++j) {
      if (i == j) continue;
      double pij = std::exp(theta[i]) / (std::exp(theta[i]) + std::exp(theta[j]));
      ll += (w[i][j] + c) * std::log(pij);
    }
  }
  return ll;
}

// Coarse-to-fine grid search over zero-sum log-strengths for n = 3.
inline std::vector<double> bt_grid_search3(const std::vector<std::vector<double>>& w, double c) {
  double a0 = 0, b0 = 0, span = 8.0;
  for (int level = 0; level < 40; ++level) {
    double best_ll = -1e300, ba = a0, bb = b0;
    const int steps = 20;
    for (int i = -steps; i <= steps; ++i) {
      for (int j = -steps; j <= steps; ++j) {
        double a = a0 + span * i / steps, b = b0 + span * j / steps;
        double ll = bt_loglik(w, c, {a, b, -a - b});
        if (ll > best_ll) {
          best_ll = ll;
          ba = a;
          bb = b;
        }
      }
    }
    a0 = ba;
    b0 = bb;
    span /= 4;
  }
  return {a0, b0, -a0 - b0};
}

// Maximizes a log q + b log (1 - q) over q on a refining grid.
inline double two_way_grid(double a, double b) {
  double lo = 0, hi = 1;
  for (int level = 0; level < 60; ++level) {
    double best = lo, best_v = -1e300;
    for (int i = 1; i < 100; ++i) {
      double q = lo + (hi - lo) * i / 100;
      double v = a * std::log(q) + b * std::log(1 - q);
      if (v > best_v) {
        best_v = v;
        best = q;
      }
    }
    double step = (hi - lo) / 100;
    lo = std::max(0.0, best - step);
    hi = std::min(1.0, best + step);
  }
  return (lo + hi) / 2;
}

// Pearson correlation of average ranks, computed by explicit pairwise rank
// counting.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i]) ++less;
        if (v[j] == v[i]) ++equal;
      }
      r[i] = less + (equal + 1) / 2.0;
    }
    return r;
  };
  auto rx = ranks(x), ry = ranks(y);
  double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline Order random_pool(std::mt19937& rng, int max_n) {
  int n = std::uniform_int_distribution<int>(1, max_n)(rng);
  Order pool;
  for (int i = 0; i < n; ++i) pool.push_back(std::string(1, static_cast<char>('A' + i)));
  std::shuffle(pool.begin(), pool.end(), rng);
  return pool;
}

inline std::vector<Order> random_ballots(std::mt19937& rng, const Order& pool, int max_ballots) {
  int m = std::uniform_int_distribution<int>(1, max_ballots)(rng);
  std::vector<Order> ballots;
  for (int i = 0; i < m; ++i) {
    Order b = pool;
    std::shuffle(b.begin(), b.end(), rng);
    ballots.push_back(b);
  }
  return ballots;
}

}  // namespace oracle
