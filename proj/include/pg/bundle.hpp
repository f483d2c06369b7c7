#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pg/common.hpp"

namespace pg {

struct JordanBlock {
  cd kappa{0.0, 0.0};
  int dim = 1;
  bool operator==(const JordanBlock&) const = default;
};

enum class PunctureId { Zero, Infinity };

struct PuncturePresentation {
  PunctureId id = PunctureId::Zero;
  std::vector<JordanBlock> blocks;
};

struct ParabolicStructure {
  std::vector<double> zero;
  std::vector<double> infinity;
};

// A validated bundle. Blocks are in canonical order at each end and
// match[l] is the infinity block glued to zero block l. Zero-end order
// defines the global block order used by every frame downstream.
struct FlatBundleSpec {
  int rank = 0;
  PuncturePresentation zero;
  PuncturePresentation infinity;
  ParabolicStructure weights;
  std::vector<int> match;

  int block_count() const { return static_cast<int>(zero.blocks.size()); }
  int block_dim(int l) const { return zero.blocks[l].dim; }
  int block_offset(int l) const;
  cd block_kappa(int l) const { return zero.blocks[l].kappa; }
  double weight_zero(int l) const { return weights.zero[l]; }
  double weight_infinity(int l) const { return weights.infinity[match[l]]; }
};

struct FlatSubbundleSpec {
  std::vector<int> prefix_zero;      // per zero-end block
  std::vector<int> prefix_infinity;  // per infinity-end block
  int rank() const;
  bool operator==(const FlatSubbundleSpec&) const = default;
};

struct SubbundleFamily {
  std::vector<FlatSubbundleSpec> members;
  bool degenerate = false;  // equal-kappa blocks present
};

enum class StabilityClass { Stable, StrictlySemistable, Polystable, Unstable };
const char* stability_class_name(StabilityClass c);

struct StabilityVerdict {
  StabilityClass cls = StabilityClass::Stable;
  std::optional<FlatSubbundleSpec> witness;
  double witness_slope = 0.0;
  double mu = 0.0;
  bool standard_family_only = false;
};

std::vector<JordanBlock> jordan_blocks(const Eigen::MatrixXcd& matrix, double tol);
std::vector<JordanBlock> temporal_normalize(std::vector<JordanBlock> blocks);
std::vector<int> nilpotent_weights(int d);

// Normalizes, orders (weights carried along), validates and matches the ends.
FlatBundleSpec make_bundle(int rank, const std::vector<JordanBlock>& zero_blocks,
                           const std::vector<double>& zero_weights,
                           const std::vector<JordanBlock>& infinity_blocks,
                           const std::vector<double>& infinity_weights);

// Sub given by prefix lengths per global (zero-end) block.
FlatSubbundleSpec make_subbundle(const FlatBundleSpec& bundle, const std::vector<int>& prefix);
void validate_subbundle(const FlatBundleSpec& bundle, const FlatSubbundleSpec& sub);

double parabolic_degree(const FlatBundleSpec& bundle, const FlatSubbundleSpec* sub = nullptr);
double slope(const FlatBundleSpec& bundle, const FlatSubbundleSpec* sub = nullptr);
SubbundleFamily enumerate_flat_subbundles(const FlatBundleSpec& bundle);
StabilityVerdict stability_classify(const FlatBundleSpec& bundle);

bool has_equal_kappa_blocks(const FlatBundleSpec& bundle);

}  // namespace pg
