#include "pg/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace pg {

namespace {

constexpr double kMatchTol = 1e-9;
constexpr double kSlopeTol = 1e-12;

double shift_into_unit(double im) {
  double s = im - std::floor(im);
  if (s >= 1.0) s = 0.0;
  return s;
}

bool canonical_before(const JordanBlock& a, const JordanBlock& b) {
  if (a.kappa.real() != b.kappa.real()) return a.kappa.real() > b.kappa.real();
  if (a.kappa.imag() != b.kappa.imag()) return a.kappa.imag() > b.kappa.imag();
  return a.dim > b.dim;
}

struct Tagged {
  JordanBlock block;
  double weight;
};

std::vector<Tagged> normalize_tagged(const std::vector<JordanBlock>& blocks, const std::vector<double>& weights) {
  std::vector<Tagged> out;
  for (size_t i = 0; i < blocks.size(); ++i) {
    JordanBlock b = blocks[i];
    b.kappa = cd(b.kappa.real(), shift_into_unit(b.kappa.imag()));
    out.push_back({b, weights[i]});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Tagged& a, const Tagged& b) { return canonical_before(a.block, b.block); });
  return out;
}

// Distance of x from the nearest integer.
double dist_to_integer(double x) { return std::abs(x - std::round(x)); }

}  // namespace

const char* stability_class_name(StabilityClass c) {
  switch (c) {
    case StabilityClass::Stable: return "stable";
    case StabilityClass::StrictlySemistable: return "strictly-semistable";
    case StabilityClass::Polystable: return "polystable";
    case StabilityClass::Unstable: return "unstable";
  }
  return "unknown";
}

int FlatBundleSpec::block_offset(int l) const {
  int off = 0;
  for (int k = 0; k < l; ++k) off += zero.blocks[k].dim;
  return off;
}

int FlatSubbundleSpec::rank() const { return std::accumulate(prefix_zero.begin(), prefix_zero.end(), 0); }

std::vector<JordanBlock> jordan_blocks(const Eigen::MatrixXcd& matrix, double tol) {
  if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "tol must be positive");
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
    fail(ErrorKind::InvalidArgument, "matrix must be square and non-empty");
  if (!matrix.allFinite()) fail(ErrorKind::InvalidArgument, "matrix has non-finite entries");
  const int n = static_cast<int>(matrix.rows());

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(matrix, false);
  if (es.info() != Eigen::Success) fail(ErrorKind::NonConvergence, "eigenvalue solver failed");
  std::vector<cd> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);

  // single-linkage clusters at tol
  std::vector<int> label(n, -1);
  int clusters = 0;
  for (int i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    std::vector<int> stack{i};
    label[i] = clusters;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int j = 0; j < n; ++j)
        if (label[j] < 0 && std::abs(ev[a] - ev[j]) <= tol) {
          label[j] = clusters;
          stack.push_back(j);
        }
    }
    ++clusters;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (label[i] != label[j] && std::abs(ev[i] - ev[j]) < 2.0 * tol)
        fail(ErrorKind::NonConvergence,
             fmt::format("eigenvalue clusters closer than 2*tol ({:.3g}); adjust tol or supply blocks", tol));

  const double scale = std::max(1.0, matrix.norm());
  const double rank_tol = std::max(tol, 1e-10) * scale;
  auto rank_of = [&](const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > rank_tol) ++r;
    return r;
  };

  std::vector<JordanBlock> out;
  for (int c = 0; c < clusters; ++c) {
    cd kappa(0.0, 0.0);
    int mult = 0;
    for (int i = 0; i < n; ++i)
      if (label[i] == c) {
        kappa += ev[i];
        ++mult;
      }
    kappa /= double(mult);
    Eigen::MatrixXcd shifted = matrix - kappa * Eigen::MatrixXcd::Identity(n, n);
    // ranks r_k of shifted^k; blocks of size >= k number r_{k-1} - r_k
    std::vector<int> r(mult + 2);
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
    r[0] = n;
    for (int k = 1; k <= mult + 1; ++k) {
      power = power * shifted;
      r[k] = rank_of(power);
    }
    int assigned = 0;
    for (int k = 1; k <= mult; ++k) {
      int at_least_k = r[k - 1] - r[k];
      int at_least_k1 = (k + 1 <= mult + 1) ? r[k] - r[k + 1] : 0;
      int exactly = at_least_k - at_least_k1;
      for (int e = 0; e < exactly; ++e) {
        out.push_back({kappa, k});
        assigned += k;
      }
    }
    if (assigned != mult)
      fail(ErrorKind::NonConvergence, fmt::format("inconsistent rank profile at eigenvalue {}+{}i", kappa.real(), kappa.imag()));
  }
  std::stable_sort(out.begin(), out.end(), canonical_before);
  return out;
}

std::vector<JordanBlock> temporal_normalize(std::vector<JordanBlock> blocks) {
  std::vector<double> dummy(blocks.size(), 0.0);
  auto tagged = normalize_tagged(blocks, dummy);
  std::vector<JordanBlock> out;
  for (auto& t : tagged) out.push_back(t.block);
  return out;
}

std::vector<int> nilpotent_weights(int d) {
  if (d < 1) fail(ErrorKind::InvalidArgument, "block size must be positive");
  std::vector<int> tau(d);
  for (int i = 1; i <= d; ++i) tau[i - 1] = 2 * i - (d + 1);
  return tau;
}

FlatBundleSpec make_bundle(int rank, const std::vector<JordanBlock>& zero_blocks,
                           const std::vector<double>& zero_weights,
                           const std::vector<JordanBlock>& infinity_blocks,
                           const std::vector<double>& infinity_weights) {
  if (rank < 1) fail(ErrorKind::InvalidPresentation, "rank must be positive");
  if (rank > kMaxRank) fail(ErrorKind::InvalidPresentation, fmt::format("rank above supported maximum {}", kMaxRank));
  auto check_end = [&](const std::vector<JordanBlock>& blocks, const std::vector<double>& w, const char* name) {
    if (blocks.empty()) fail(ErrorKind::InvalidPresentation, fmt::format("{} end has no blocks", name));
    int sum = 0;
    for (auto& b : blocks) {
      if (b.dim < 1) fail(ErrorKind::InvalidPresentation, fmt::format("{} end has a block with dim < 1", name));
      if (!std::isfinite(b.kappa.real()) || !std::isfinite(b.kappa.imag()))
        fail(ErrorKind::InvalidPresentation, fmt::format("{} end has a non-finite kappa", name));
      sum += b.dim;
    }
    if (sum != rank)
      fail(ErrorKind::InvalidPresentation, fmt::format("{} end block dims sum to {} but rank is {}", name, sum, rank));
    if (w.size() != blocks.size())
      fail(ErrorKind::InvalidPresentation,
           fmt::format("{} end has {} weights for {} blocks", name, w.size(), blocks.size()));
    for (double x : w)
      if (!std::isfinite(x)) fail(ErrorKind::InvalidPresentation, fmt::format("{} end has a non-finite weight", name));
  };
  check_end(zero_blocks, zero_weights, "zero");
  check_end(infinity_blocks, infinity_weights, "infinity");

  auto z = normalize_tagged(zero_blocks, zero_weights);
  auto inf = normalize_tagged(infinity_blocks, infinity_weights);

  FlatBundleSpec spec;
  spec.rank = rank;
  spec.zero.id = PunctureId::Zero;
  spec.infinity.id = PunctureId::Infinity;
  for (auto& t : z) {
    spec.zero.blocks.push_back(t.block);
    spec.weights.zero.push_back(t.weight);
  }
  for (auto& t : inf) {
    spec.infinity.blocks.push_back(t.block);
    spec.weights.infinity.push_back(t.weight);
  }
  if (spec.zero.blocks.size() != spec.infinity.blocks.size())
    fail(ErrorKind::UnmatchedBlocks, "block counts differ between the two ends");

  const int k = spec.block_count();
  std::vector<bool> used(k, false);
  spec.match.assign(k, -1);
  for (int l = 0; l < k; ++l) {
    const JordanBlock& b0 = spec.zero.blocks[l];
    int best = -1;
    for (int m = 0; m < k; ++m) {
      if (used[m]) continue;
      const JordanBlock& bi = spec.infinity.blocks[m];
      if (bi.dim != b0.dim) continue;
      if (dist_to_integer(bi.kappa.imag() + b0.kappa.imag()) > kMatchTol) continue;
      if (best < 0) best = m;
      if (std::abs(bi.kappa.real() + b0.kappa.real()) <= kMatchTol) {
        best = m;
        break;
      }
    }
    if (best < 0)
      fail(ErrorKind::UnmatchedBlocks,
           fmt::format("zero-end block {} (kappa {}+{}i, dim {}) has no compatible infinity block", l,
                       b0.kappa.real(), b0.kappa.imag(), b0.dim));
    used[best] = true;
    spec.match[l] = best;
  }
  return spec;
}

FlatSubbundleSpec make_subbundle(const FlatBundleSpec& bundle, const std::vector<int>& prefix) {
  if (static_cast<int>(prefix.size()) != bundle.block_count())
    fail(ErrorKind::NotAPrefix, "prefix list length differs from block count");
  FlatSubbundleSpec s;
  s.prefix_zero = prefix;
  s.prefix_infinity.assign(prefix.size(), 0);
  for (int l = 0; l < bundle.block_count(); ++l) s.prefix_infinity[bundle.match[l]] = prefix[l];
  validate_subbundle(bundle, s);
  return s;
}

void validate_subbundle(const FlatBundleSpec& bundle, const FlatSubbundleSpec& sub) {
  const int k = bundle.block_count();
  if (static_cast<int>(sub.prefix_zero.size()) != k || static_cast<int>(sub.prefix_infinity.size()) != k)
    fail(ErrorKind::NotAPrefix, "prefix list length differs from block count");
  int r0 = 0, ri = 0;
  for (int l = 0; l < k; ++l) {
    if (sub.prefix_zero[l] < 0 || sub.prefix_zero[l] > bundle.zero.blocks[l].dim)
      fail(ErrorKind::NotAPrefix, fmt::format("zero-end prefix {} out of range for block {}", sub.prefix_zero[l], l));
    if (sub.prefix_infinity[l] < 0 || sub.prefix_infinity[l] > bundle.infinity.blocks[l].dim)
      fail(ErrorKind::NotAPrefix,
           fmt::format("infinity-end prefix {} out of range for block {}", sub.prefix_infinity[l], l));
    r0 += sub.prefix_zero[l];
    ri += sub.prefix_infinity[l];
  }
  if (r0 != ri) fail(ErrorKind::RankMismatch, fmt::format("subbundle rank {} at zero but {} at infinity", r0, ri));
  for (int l = 0; l < k; ++l)
    if (sub.prefix_infinity[bundle.match[l]] != sub.prefix_zero[l])
      fail(ErrorKind::NotAPrefix, fmt::format("prefix of block {} differs between the glued ends", l));
}

double parabolic_degree(const FlatBundleSpec& bundle, const FlatSubbundleSpec* sub) {
  double deg = 0.0;
  for (int l = 0; l < bundle.block_count(); ++l) {
    int s0 = sub ? sub->prefix_zero[l] : bundle.zero.blocks[l].dim;
    int si = sub ? sub->prefix_infinity[l] : bundle.infinity.blocks[l].dim;
    deg += s0 * bundle.weights.zero[l] + si * bundle.weights.infinity[l];
  }
  return deg;
}

double slope(const FlatBundleSpec& bundle, const FlatSubbundleSpec* sub) {
  int r = sub ? sub->rank() : bundle.rank;
  if (r == 0) fail(ErrorKind::InvalidArgument, "slope of a rank-0 subbundle");
  return parabolic_degree(bundle, sub) / r;
}

bool has_equal_kappa_blocks(const FlatBundleSpec& bundle) {
  for (int a = 0; a < bundle.block_count(); ++a)
    for (int b = a + 1; b < bundle.block_count(); ++b)
      if (std::abs(bundle.zero.blocks[a].kappa - bundle.zero.blocks[b].kappa) <= kMatchTol) return true;
  return false;
}

SubbundleFamily enumerate_flat_subbundles(const FlatBundleSpec& bundle) {
  SubbundleFamily fam;
  fam.degenerate = has_equal_kappa_blocks(bundle);
  const int k = bundle.block_count();
  std::vector<int> prefix(k, 0);
  // odometer with the first block as the fastest digit
  while (true) {
    int r = std::accumulate(prefix.begin(), prefix.end(), 0);
    if (r > 0 && r < bundle.rank) fam.members.push_back(make_subbundle(bundle, prefix));
    int pos = 0;
    while (pos < k && prefix[pos] == bundle.block_dim(pos)) prefix[pos++] = 0;
    if (pos == k) break;
    ++prefix[pos];
  }
  return fam;
}

StabilityVerdict stability_classify(const FlatBundleSpec& bundle) {
  StabilityVerdict v;
  v.mu = slope(bundle);
  SubbundleFamily fam = enumerate_flat_subbundles(bundle);
  v.standard_family_only = fam.degenerate;
  if (fam.members.empty()) {
    v.cls = StabilityClass::Stable;
    return v;
  }
  int arg = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < fam.members.size(); ++i) {
    double s = slope(bundle, &fam.members[i]);
    if (s > best + kSlopeTol) {
      best = s;
      arg = static_cast<int>(i);
    }
  }
  if (best < v.mu - kSlopeTol) {
    v.cls = StabilityClass::Stable;
    return v;
  }
  v.witness = fam.members[arg];
  v.witness_slope = best;
  if (best > v.mu + kSlopeTol) {
    v.cls = StabilityClass::Unstable;
    return v;
  }
  bool polystable = true;
  for (int l = 0; l < bundle.block_count(); ++l) {
    if (bundle.block_dim(l) != 1) polystable = false;
    double wl = bundle.weight_zero(l) + bundle.weight_infinity(l);
    if (std::abs(wl - v.mu) > kSlopeTol) polystable = false;
  }
  if (polystable) {
    v.cls = StabilityClass::Polystable;
    v.witness.reset();
    v.witness_slope = 0.0;
  } else {
    v.cls = StabilityClass::StrictlySemistable;
  }
  return v;
}

}  // namespace pg
