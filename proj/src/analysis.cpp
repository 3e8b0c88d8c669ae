#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "errors.hpp"

namespace gnno {

std::vector<std::pair<uint32_t, uint32_t>> sample_group_pairs(
    const OverlapIndex& index, OverlapGroup group, size_t max_pairs, Rng& rng) {
  const size_t n = index.num_items();
  std::vector<std::pair<uint32_t, uint32_t>> pairs;

  if (group == OverlapGroup::Zero) {
    if (n < 2) return pairs;
    // uniform pair draws, rejecting pairs present in the index
    const size_t attempt_cap = max_pairs * 50 + 1000;
    size_t attempts = 0;
    while (pairs.size() < max_pairs && attempts++ < attempt_cap) {
      const uint32_t i = static_cast<uint32_t>(rng.next_below(n));
      uint32_t j = static_cast<uint32_t>(rng.next_below(n - 1));
      if (j >= i) ++j;
      if (index.contains(i, j)) continue;
      pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
    return pairs;
  }

  for (uint32_t i = 0; i < n; ++i) {
    for (const auto& [j, v] : index.overlaps(i)) {
      if (j <= i) continue;
      if (group_of(v) == group) pairs.emplace_back(i, j);
    }
  }
  if (pairs.size() > max_pairs) {
    // partial Fisher-Yates, keep the first max_pairs
    for (size_t k = 0; k < max_pairs; ++k) {
      const size_t pick = k + rng.next_below(pairs.size() - k);
      std::swap(pairs[k], pairs[pick]);
    }
    pairs.resize(max_pairs);
  }
  return pairs;
}

double pair_similarity(const ModelParams& params, uint32_t i, uint32_t j) {
  const auto a = params.row(i);
  const auto b = params.row(j);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t d = 0; d < params.dim; ++d) {
    dot += a[d] * b[d];
    na += a[d] * a[d];
    nb += b[d] * b[d];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<GroupHistogram> snapshot_distributions(const ModelParams& params,
                                                   const OverlapIndex& index,
                                                   uint32_t epoch,
                                                   const AnalysisConfig& config) {
  if (config.bins < 1) throw UsageError("analysis needs at least one bin");
  std::vector<GroupHistogram> out;
  const OverlapGroup groups[] = {OverlapGroup::Zero, OverlapGroup::Low,
                                 OverlapGroup::Medium, OverlapGroup::High};
  for (OverlapGroup group : groups) {
    GroupHistogram hist;
    hist.group = group;
    hist.epoch = epoch;
    hist.bin_edges.resize(config.bins + 1);
    for (size_t b = 0; b <= config.bins; ++b) {
      hist.bin_edges[b] =
          -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(config.bins);
    }
    hist.counts.assign(config.bins, 0);

    Rng rng(mix_seed({config.seed, static_cast<uint64_t>(group), epoch}));
    const auto pairs =
        sample_group_pairs(index, group, config.max_pairs_per_group, rng);
    hist.pair_count = pairs.size();
    hist.similarities.reserve(pairs.size());
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& [i, j] : pairs) {
      const double s = pair_similarity(params, i, j);
      hist.similarities.push_back(s);
      sum += s;
      sum_sq += s * s;
      const double clamped = std::clamp(s, -1.0, 1.0);
      size_t bin = static_cast<size_t>((clamped + 1.0) / 2.0 *
                                       static_cast<double>(config.bins));
      if (bin >= config.bins) bin = config.bins - 1;
      ++hist.counts[bin];
    }
    if (!pairs.empty()) {
      const double n = static_cast<double>(pairs.size());
      hist.mean = sum / n;
      const double var = std::max(0.0, sum_sq / n - hist.mean * hist.mean);
      hist.stddev = std::sqrt(var);
    }
    out.push_back(std::move(hist));
  }
  return out;
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw UsageError("wasserstein1 needs nonempty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  // integrate |F_a - F_b| over the merged support
  double dist = 0.0;
  size_t ia = 0, ib = 0;
  double prev = std::min(sa.front(), sb.front());
  while (ia < sa.size() || ib < sb.size()) {
    const double xa = ia < sa.size() ? sa[ia] : std::numeric_limits<double>::infinity();
    const double xb = ib < sb.size() ? sb[ib] : std::numeric_limits<double>::infinity();
    const double x = std::min(xa, xb);
    const double fa = static_cast<double>(ia) / static_cast<double>(sa.size());
    const double fb = static_cast<double>(ib) / static_cast<double>(sb.size());
    dist += std::abs(fa - fb) * (x - prev);
    prev = x;
    while (ia < sa.size() && sa[ia] == x) ++ia;
    while (ib < sb.size() && sb[ib] == x) ++ib;
  }
  return dist;
}

void write_histogram_csv(std::span<const GroupHistogram> histograms,
                         std::ostream& out, bool header) {
  if (header) out << "epoch,group,bin_lo,bin_hi,count\n";
  for (const auto& hist : histograms) {
    for (size_t b = 0; b < hist.counts.size(); ++b) {
      out << hist.epoch << ',' << group_name(hist.group) << ','
          << hist.bin_edges[b] << ',' << hist.bin_edges[b + 1] << ','
          << hist.counts[b] << '\n';
    }
  }
}

}  // namespace gnno
