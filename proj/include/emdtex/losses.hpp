#pragma once

// Loss calculus for the shape and texture branches. Network outputs (maps,
// encoder features, adversarial scalars) are inputs here; nothing is learned.

#include <cstddef>
#include <span>
#include <vector>

#include "emdtex/field.hpp"

namespace emdtex::losses {

struct LossWeights {
  double lambda_rec = 10.0;
  double lambda_cyc = 10.0;
  double lambda_id = 1.0;
  double lambda_age = 1.0;
  double lambda_emd = 0.3;
  double lambda_s = 0.3;

  // Throws kInvalidArgument on negative or non-finite weights.
  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

inline constexpr std::size_t kAgeBlock = 50;

// 50*N entries; block `group` (1-based) is all ones, the rest zero.
struct AgeCode {
  std::vector<double> values;
  std::size_t group = 0;
  std::size_t n_groups = 0;
};

// Throws kGroupOutOfRange unless 1 <= group <= n_groups.
AgeCode age_code(std::size_t group, std::size_t n_groups);

// Mean absolute difference. Throws kShapeMismatch on size mismatch or empty input.
double l1_mean(std::span<const double> a, std::span<const double> b);
// Mean over entries where mask != 0. mask has one entry per element.
double l1_mean(std::span<const double> a, std::span<const double> b,
               std::span<const unsigned char> mask);
double l1_mean(const ScalarField& a, const ScalarField& b);
// Averages over all channels; a per-texel mask (H*W entries) applies to every channel.
double l1_mean(const MultiChannelField& a, const MultiChannelField& b);
double l1_mean(const MultiChannelField& a, const MultiChannelField& b,
               std::span<const unsigned char> texel_mask);

inline double reconstruction_loss(const MultiChannelField& y_src, const MultiChannelField& x) {
  return l1_mean(y_src, x);
}
inline double cycle_loss(const MultiChannelField& y_cyc, const MultiChannelField& x) {
  return l1_mean(y_cyc, x);
}
inline double identity_loss(std::span<const double> f_x, std::span<const double> f_y) {
  return l1_mean(f_x, f_y);
}

// |E_age(y_tgt) - z_tgt|_1 + |E_age(x) - z_src|_1, each reduced by mean.
double age_loss(std::span<const double> e_gen, const AgeCode& z_tgt,
                std::span<const double> e_real, const AgeCode& z_src);

// base + lambda_emd * imf_term
double refactor_with_imf(double base, double imf_term, const LossWeights& w);

// lambda_rec * rec + lambda_cyc * cyc + adv
double shape_branch_loss(double rec, double cyc, double adv, const LossWeights& w);

// lambda_rec * rec' + lambda_cyc * cyc' + adv' + lambda_age * age + lambda_id * id,
// with the primed terms already refactored.
double texture_branch_loss(double rec_refactored, double cyc_refactored, double adv_refactored,
                           double age, double id, const LossWeights& w);

// lambda_s * l_s + l_t
double total_loss(double l_s, double l_t, const LossWeights& w);

struct ShapeTerms {
  double rec = 0.0;
  double cyc = 0.0;
  double adv = 0.0;
};

struct TextureTerms {
  double rec = 0.0;
  double rec_imf = 0.0;
  double cyc = 0.0;
  double cyc_imf = 0.0;
  double adv = 0.0;
  double adv_imf = 0.0;
  double age = 0.0;
  double id = 0.0;
};

struct LossReport {
  LossWeights weights;
  ShapeTerms shape;
  TextureTerms texture;
  double rec_refactored = 0.0;
  double cyc_refactored = 0.0;
  double adv_refactored = 0.0;
  double shape_total = 0.0;    // L^s
  double texture_total = 0.0;  // L^t
  double total = 0.0;          // L
};

LossReport make_report(const ShapeTerms& shape, const TextureTerms& texture,
                       const LossWeights& w);

// Recomputes every composite from the itemized terms and compares bit-for-bit.
bool is_consistent(const LossReport& report);

}  // namespace emdtex::losses
