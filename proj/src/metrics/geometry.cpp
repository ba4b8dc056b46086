// Copyright 2026 The meld Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "meld/common.hpp"
#include "meld/metrics.hpp"

namespace meld::metrics {

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine_distance: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error("cosine_distance: zero vector");
  return std::clamp(1.0 - dot / std::sqrt(na * nb), 0.0, 2.0);
}

namespace {

using Vec = std::vector<double>;

Vec normalized(const Vec& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  if (n == 0.0) throw Error("geometry_stats: zero embedding");
  n = std::sqrt(n);
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

Vec centroid(const std::vector<Vec>& e, const std::vector<std::size_t>& members) {
  Vec c(e[members.front()].size(), 0.0);
  for (std::size_t m : members) {
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += e[m][k];
  }
  for (double& x : c) x /= static_cast<double>(members.size());
  return c;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double mean_pairwise(const std::vector<Vec>& points) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      total += cosine_distance(points[i], points[j]);
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

GeometryStats geometry_stats(const std::vector<std::vector<double>>& embeddings,
                             std::span<const int> source_ids, std::span<const int> group_ids,
                             std::span<const std::uint8_t> is_clean) {
  const std::size_t n = embeddings.size();
  if (source_ids.size() != n || group_ids.size() != n) {
    throw Error("geometry_stats: id lists must match the embedding count");
  }
  if (!is_clean.empty() && is_clean.size() != n) throw Error("geometry_stats: is_clean length mismatch");
  std::vector<Vec> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (embeddings[i].size() != embeddings[0].size()) throw Error("geometry_stats: ragged embeddings");
    e[i] = normalized(embeddings[i]);
  }

  // Row i owns pairs (i, j > i); rows are concatenated in order afterwards.
  std::vector<std::vector<double>> within_rows(n), between_rows(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = cosine_distance(e[i], e[j]);
      (source_ids[i] == source_ids[j] ? within_rows[i] : between_rows[i]).push_back(d);
    }
  });
  GeometryStats out;
  for (std::size_t i = 0; i < n; ++i) {
    out.within.insert(out.within.end(), within_rows[i].begin(), within_rows[i].end());
    out.between.insert(out.between.end(), between_rows[i].begin(), between_rows[i].end());
  }
  out.mean_within = mean_of(out.within);
  out.mean_between = mean_of(out.between);

  const std::size_t nw = out.within.size(), nb = out.between.size();
  if (nw >= 2 && nb >= 2) {
    double ssw = 0.0, ssb = 0.0;
    for (double d : out.within) ssw += (d - out.mean_within) * (d - out.mean_within);
    for (double d : out.between) ssb += (d - out.mean_between) * (d - out.mean_between);
    const double pooled = std::sqrt((ssw + ssb) / static_cast<double>(nw + nb - 2));
    if (pooled > 0.0) out.cohens_d = (out.mean_between - out.mean_within) / pooled;
  }
  if (!out.cohens_d) out.warnings.push_back("cohens_d undefined");

  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[group_ids[i]].push_back(i);
  std::vector<Vec> centroids;
  std::vector<double> dispersion;
  for (const auto& [gid, members] : groups) {
    if (members.size() < 2) {
      out.warnings.push_back("group " + std::to_string(gid) + " has fewer than 2 members; excluded");
      continue;
    }
    const Vec c = centroid(e, members);
    double spread = 0.0;
    for (std::size_t m : members) spread += cosine_distance(e[m], c);
    dispersion.push_back(spread / static_cast<double>(members.size()));
    centroids.push_back(c);
  }
  if (centroids.size() >= 2) {
    const double within = mean_of(dispersion);
    if (within > 0.0) out.bw_ratio = mean_pairwise(centroids) / within;
  }
  if (!out.bw_ratio) out.warnings.push_back("bw_ratio undefined");

  if (!is_clean.empty()) {
    std::vector<Vec> clean_centroids;
    double spoke_total = 0.0;
    std::size_t spoke_count = 0;
    for (const auto& [gid, members] : groups) {
      std::vector<std::size_t> clean, attacked;
      for (std::size_t m : members) (is_clean[m] ? clean : attacked).push_back(m);
      if (clean.empty()) continue;
      const Vec c = centroid(e, clean);
      for (std::size_t m : attacked) {
        spoke_total += cosine_distance(c, e[m]);
        ++spoke_count;
      }
      clean_centroids.push_back(c);
    }
    const double inter = mean_pairwise(clean_centroids);
    if (spoke_count > 0 && clean_centroids.size() >= 2 && inter > 0.0) {
      out.spoke_wb = (spoke_total / static_cast<double>(spoke_count)) / inter;
    } else {
      out.warnings.push_back("spoke_wb undefined");
    }
  }
  return out;
}

}  // namespace meld::metrics
