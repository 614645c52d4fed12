#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "brepseq/geometry.hpp"
#include "brepseq/util.hpp"

namespace brepseq {

/// Residual quantizer over standardized descriptors. Each level holds `entries` trained centroids
/// followed by the zero centroid at index `entries`.
struct Codebook {
  int levels = 0;
  int entries = 0;
  int dimension = 0;
  std::vector<double> mean;
  std::vector<double> scale;
  /// centroids[level][code * dimension + k]
  std::vector<std::vector<double>> centroids;
  /// RMS of (decoded - original) over the training corpus, raw units, all levels used.
  double corpus_rms = 0.0;

  int zero_code() const { return entries; }
  int codes_per_level() const { return entries + 1; }
  std::span<const double> centroid(int level, int code) const {
    return {centroids[level].data() + static_cast<std::size_t>(code) * dimension, static_cast<std::size_t>(dimension)};
  }

  std::string id() const {
    Fnv1a h;
    h.str("codebook-v1").u64(levels).u64(entries).u64(dimension);
    for (double v : mean) h.f64(v);
    for (double v : scale) h.f64(v);
    for (const auto& lvl : centroids) {
      for (double v : lvl) h.f64(v);
    }
    return h.hex();
  }
};

namespace detail {

inline double squared_distance(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

/// Index of the nearest row in `table` (rows x dim); lowest index wins ties.
inline int nearest_row(const double* x, const std::vector<double>& table, int rows, int dim, double* best_out = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int r = 0; r < rows; ++r) {
    // Partial sums bail out once they pass the best so far.
    const double* row = table.data() + static_cast<std::size_t>(r) * dim;
    double d = 0.0;
    for (int k = 0; k < dim && d < best_d; ++k) d += (x[k] - row[k]) * (x[k] - row[k]);
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  if (best_out) *best_out = best_d;
  return best;
}

/// Lloyd's k-means with k-means++ seeding. `data` is n x dim, row-major.
inline std::vector<double> kmeans(const std::vector<double>& data, int n, int dim, int k, Rng& rng, int max_iterations) {
  std::vector<double> centers(static_cast<std::size_t>(k) * dim);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  auto copy_row = [&](int dst, int src) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(src) * dim, dim, centers.begin() + static_cast<std::ptrdiff_t>(dst) * dim);
  };
  auto refresh = [&](int c) {
    const double* ctr = centers.data() + static_cast<std::size_t>(c) * dim;
    for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(data.data() + static_cast<std::size_t>(i) * dim, ctr, dim));
  };
  copy_row(0, static_cast<int>(rng.below(n)));
  refresh(0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    int pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.below(n));
    }
    copy_row(c, pick);
    refresh(c);
  }

  std::vector<int> assign(n, -1);
  std::vector<double> sums(static_cast<std::size_t>(k) * dim);
  std::vector<int> counts(k);
  std::vector<double> dist(n);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int a = nearest_row(data.data() + static_cast<std::size_t>(i) * dim, centers, k, dim, &dist[i]);
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    if (!changed && it > 0) break;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      ++counts[assign[i]];
      const double* x = data.data() + static_cast<std::size_t>(i) * dim;
      double* s = sums.data() + static_cast<std::size_t>(assign[i]) * dim;
      for (int d = 0; d < dim; ++d) s[d] += x[d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster with the worst-served point.
        const int far = static_cast<int>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        copy_row(c, far);
        dist[far] = 0.0;
        continue;
      }
      for (int d = 0; d < dim; ++d) {
        centers[static_cast<std::size_t>(c) * dim + d] = sums[static_cast<std::size_t>(c) * dim + d] / counts[c];
      }
    }
  }
  return centers;
}

}  // namespace detail

struct CodebookTraining {
  int levels = 4;
  int entries = 256;
  std::uint64_t seed = 0;
  int max_iterations = 25;
  /// k-means runs on at most this many descriptors (seeded subsample); 0 = all.
  int max_training_vectors = 16384;
};

/// Greedy nearest-centroid codes, one per level, on the running residual.
inline std::vector<int> rq_encode(std::span<const double> descriptor, const Codebook& cb) {
  if (static_cast<int>(descriptor.size()) != cb.dimension) throw Error(ErrorKind::kRange, "descriptor length does not match codebook");
  std::vector<double> residual(cb.dimension);
  for (int k = 0; k < cb.dimension; ++k) residual[k] = (descriptor[k] - cb.mean[k]) / cb.scale[k];
  std::vector<int> codes(cb.levels);
  for (int l = 0; l < cb.levels; ++l) {
    const int c = detail::nearest_row(residual.data(), cb.centroids[l], cb.codes_per_level(), cb.dimension);
    codes[l] = c;
    const auto ctr = cb.centroid(l, c);
    for (int k = 0; k < cb.dimension; ++k) residual[k] -= ctr[k];
  }
  return codes;
}

/// Sum of the first `levels_used` centroids (all when negative), mapped back to raw units.
inline std::vector<double> rq_decode(std::span<const int> codes, const Codebook& cb, int levels_used = -1) {
  const int used = levels_used < 0 ? static_cast<int>(codes.size()) : std::min<int>(levels_used, static_cast<int>(codes.size()));
  if (static_cast<int>(codes.size()) > cb.levels) throw Error(ErrorKind::kRange, "more codes than codebook levels");
  std::vector<double> sum(cb.dimension, 0.0);
  for (int l = 0; l < used; ++l) {
    if (codes[l] < 0 || codes[l] >= cb.codes_per_level()) {
      throw Error(ErrorKind::kRange, "code " + std::to_string(codes[l]) + " outside level " + std::to_string(l));
    }
    const auto ctr = cb.centroid(l, codes[l]);
    for (int k = 0; k < cb.dimension; ++k) sum[k] += ctr[k];
  }
  for (int k = 0; k < cb.dimension; ++k) sum[k] = sum[k] * cb.scale[k] + cb.mean[k];
  return sum;
}

/// Squared reconstruction error of one descriptor, raw units.
inline double rq_squared_error(std::span<const double> descriptor, const Codebook& cb, int levels_used = -1) {
  const auto codes = rq_encode(descriptor, cb);
  const auto dec = rq_decode(codes, cb, levels_used);
  double s = 0.0;
  for (int k = 0; k < cb.dimension; ++k) s += (dec[k] - descriptor[k]) * (dec[k] - descriptor[k]);
  return s;
}

/// Stacked k-means: level 1 on standardized descriptors, level d on the residuals left by levels < d.
inline Codebook train_codebook(const std::vector<std::vector<double>>& corpus, const CodebookTraining& opts) {
  if (opts.levels < 1) throw Error(ErrorKind::kPrecondition, "codebook needs at least one level");
  if (opts.entries < 1) throw Error(ErrorKind::kPrecondition, "codebook needs at least one entry per level");
  if (static_cast<int>(corpus.size()) < opts.entries) {
    throw Error(ErrorKind::kPrecondition, "corpus has " + std::to_string(corpus.size()) + " descriptors, fewer than K=" +
                                              std::to_string(opts.entries) + "; use a smaller codebook size");
  }
  const int n = static_cast<int>(corpus.size());
  const int dim = static_cast<int>(corpus.front().size());
  for (const auto& d : corpus) {
    if (static_cast<int>(d.size()) != dim) throw Error(ErrorKind::kRange, "descriptor lengths differ within the corpus");
  }

  Codebook cb;
  cb.levels = opts.levels;
  cb.entries = opts.entries;
  cb.dimension = dim;
  cb.mean.assign(dim, 0.0);
  cb.scale.assign(dim, 1.0);
  for (const auto& d : corpus) {
    for (int k = 0; k < dim; ++k) cb.mean[k] += d[k];
  }
  for (double& m : cb.mean) m /= n;
  // One scale for all coordinates: k-means then minimizes raw Euclidean error, and the zero
  // centroid keeps per-vector error non-increasing in raw units too.
  double var = 0.0;
  for (const auto& d : corpus) {
    for (int k = 0; k < dim; ++k) var += (d[k] - cb.mean[k]) * (d[k] - cb.mean[k]);
  }
  const double sd = std::sqrt(var / (static_cast<double>(n) * dim));
  cb.scale.assign(dim, sd > 1e-12 ? sd : 1.0);

  std::vector<double> residual(static_cast<std::size_t>(n) * dim);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) residual[static_cast<std::size_t>(i) * dim + k] = (corpus[i][k] - cb.mean[k]) / cb.scale[k];
  }

  Rng rng(opts.seed);
  std::vector<int> fit_rows(n);
  for (int i = 0; i < n; ++i) fit_rows[i] = i;
  if (opts.max_training_vectors > 0 && n > std::max(opts.max_training_vectors, opts.entries)) {
    for (int i = 0; i < opts.max_training_vectors; ++i) std::swap(fit_rows[i], fit_rows[i + static_cast<int>(rng.below(n - i))]);
    fit_rows.resize(opts.max_training_vectors);
    std::sort(fit_rows.begin(), fit_rows.end());
  }
  const int m = static_cast<int>(fit_rows.size());
  std::vector<double> fit_data(static_cast<std::size_t>(m) * dim);
  for (int l = 0; l < opts.levels; ++l) {
    for (int i = 0; i < m; ++i) {
      std::copy_n(residual.begin() + static_cast<std::ptrdiff_t>(fit_rows[i]) * dim, dim, fit_data.begin() + static_cast<std::ptrdiff_t>(i) * dim);
    }
    std::vector<double> table = detail::kmeans(fit_data, m, dim, opts.entries, rng, opts.max_iterations);
    table.resize(table.size() + dim, 0.0);
    for (int i = 0; i < n; ++i) {
      double* r = residual.data() + static_cast<std::size_t>(i) * dim;
      const int c = detail::nearest_row(r, table, opts.entries + 1, dim);
      const double* ctr = table.data() + static_cast<std::size_t>(c) * dim;
      for (int k = 0; k < dim; ++k) r[k] -= ctr[k];
    }
    cb.centroids.push_back(std::move(table));
  }

  double total = 0.0;
  for (const auto& d : corpus) total += rq_squared_error(d, cb);
  cb.corpus_rms = std::sqrt(total / (static_cast<double>(n) * dim));
  return cb;
}

}  // namespace brepseq
