#include "emdtex/losses.hpp"

#include <cmath>
#include <string>

#include "emdtex/error.hpp"

namespace emdtex::losses {

void LossWeights::validate() const {
  for (double v : {lambda_rec, lambda_cyc, lambda_id, lambda_age, lambda_emd, lambda_s}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "loss weights must be finite and >= 0");
    }
  }
}

AgeCode age_code(std::size_t group, std::size_t n_groups) {
  if (n_groups < 1 || group < 1 || group > n_groups) {
    throw Error(ErrorCode::kGroupOutOfRange, "age group " + std::to_string(group) +
                                                 " outside 1.." + std::to_string(n_groups));
  }
  AgeCode code{std::vector<double>(kAgeBlock * n_groups, 0.0), group, n_groups};
  const std::size_t start = (group - 1) * kAgeBlock;
  for (std::size_t i = start; i < start + kAgeBlock; ++i) code.values[i] = 1.0;
  return code;
}

namespace {

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kShapeMismatch,
                "L1 operands differ in size: " + std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a == 0) throw Error(ErrorCode::kShapeMismatch, "L1 of empty operands");
}

}  // namespace

double l1_mean(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double l1_mean(std::span<const double> a, std::span<const double> b,
               std::span<const unsigned char> mask) {
  check_sizes(a.size(), b.size());
  if (mask.size() != a.size()) throw Error(ErrorCode::kShapeMismatch, "mask size mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i] == 0) continue;
    sum += std::abs(a[i] - b[i]);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double l1_mean(const ScalarField& a, const ScalarField& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "fields differ in shape");
  return l1_mean(a.values(), b.values());
}

double l1_mean(const MultiChannelField& a, const MultiChannelField& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "fields differ in shape");
  std::vector<unsigned char> all(a.height() * a.width(), 1);
  return l1_mean(a, b, all);
}

double l1_mean(const MultiChannelField& a, const MultiChannelField& b,
               std::span<const unsigned char> texel_mask) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "fields differ in shape");
  if (a.num_channels() == 0 || a.height() * a.width() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "L1 of empty operands");
  }
  if (texel_mask.size() != a.height() * a.width()) {
    throw Error(ErrorCode::kShapeMismatch, "mask size mismatch");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < a.num_channels(); ++c) {
    const auto va = a.channel(c).values();
    const auto vb = b.channel(c).values();
    for (std::size_t i = 0; i < va.size(); ++i) {
      if (texel_mask[i] == 0) continue;
      sum += std::abs(va[i] - vb[i]);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double age_loss(std::span<const double> e_gen, const AgeCode& z_tgt,
                std::span<const double> e_real, const AgeCode& z_src) {
  return l1_mean(e_gen, z_tgt.values) + l1_mean(e_real, z_src.values);
}

double refactor_with_imf(double base, double imf_term, const LossWeights& w) {
  return base + w.lambda_emd * imf_term;
}

double shape_branch_loss(double rec, double cyc, double adv, const LossWeights& w) {
  return w.lambda_rec * rec + w.lambda_cyc * cyc + adv;
}

double texture_branch_loss(double rec_refactored, double cyc_refactored, double adv_refactored,
                           double age, double id, const LossWeights& w) {
  return w.lambda_rec * rec_refactored + w.lambda_cyc * cyc_refactored + adv_refactored +
         w.lambda_age * age + w.lambda_id * id;
}

double total_loss(double l_s, double l_t, const LossWeights& w) {
  return w.lambda_s * l_s + l_t;
}

LossReport make_report(const ShapeTerms& shape, const TextureTerms& texture,
                       const LossWeights& w) {
  w.validate();
  LossReport r;
  r.weights = w;
  r.shape = shape;
  r.texture = texture;
  r.rec_refactored = refactor_with_imf(texture.rec, texture.rec_imf, w);
  r.cyc_refactored = refactor_with_imf(texture.cyc, texture.cyc_imf, w);
  r.adv_refactored = refactor_with_imf(texture.adv, texture.adv_imf, w);
  r.shape_total = shape_branch_loss(shape.rec, shape.cyc, shape.adv, w);
  r.texture_total = texture_branch_loss(r.rec_refactored, r.cyc_refactored, r.adv_refactored,
                                        texture.age, texture.id, w);
  r.total = total_loss(r.shape_total, r.texture_total, w);
  return r;
}

bool is_consistent(const LossReport& r) {
  const LossWeights& w = r.weights;
  const double rec = r.texture.rec + w.lambda_emd * r.texture.rec_imf;
  const double cyc = r.texture.cyc + w.lambda_emd * r.texture.cyc_imf;
  const double adv = r.texture.adv + w.lambda_emd * r.texture.adv_imf;
  const double ls = w.lambda_rec * r.shape.rec + w.lambda_cyc * r.shape.cyc + r.shape.adv;
  const double lt = w.lambda_rec * rec + w.lambda_cyc * cyc + adv + w.lambda_age * r.texture.age +
                    w.lambda_id * r.texture.id;
  return rec == r.rec_refactored && cyc == r.cyc_refactored && adv == r.adv_refactored &&
         ls == r.shape_total && lt == r.texture_total && r.total == w.lambda_s * ls + lt;
}

}  // namespace emdtex::losses
