#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "imae/nn.hpp"

namespace imae {

struct GradcheckOptions {
  Index input_width = 10;
  Index hidden_width = 7;
  Index batch = 4;
  bool tied = false;
  double step = 1e-5;
  double rel_tol = 1e-5;
  /// Absolute differences at or below this always pass.
  double abs_floor = 1e-8;
};

struct BlockError {
  std::string name;
  double max_error = 0.0;  // max over entries of the combined error below
  double max_abs_diff = 0.0;
};

struct GradcheckReport {
  Variant variant = Variant::AE;
  std::uint64_t seed = 0;
  bool tied = false;
  std::vector<BlockError> blocks;
  double max_error = 0.0;
  bool passed = false;
};

using GradientFn = std::function<ParamGrads(const Network&, const ForwardTrace&, const LossSpec&,
                                            const Matrix&)>;

/// Per-entry error |a - n| / max(|a|, |n|, abs_floor / rel_tol); an entry
/// passes iff this is <= rel_tol, i.e. iff the relative error is within
/// tolerance or the absolute difference is within the floor.
double gradient_entry_error(double analytic, double numeric, const GradcheckOptions& opt);

/// Default hyper-parameters used when checking `variant` (CAE 0.1, IMAE 1,
/// DAE with mask noise p = 0.3).
LossSpec default_loss(Variant variant);

/// Compares `analytic` (backward by default) against central differences of
/// total_loss on a random input -> hidden -> input network and batch drawn
/// from `seed`.
GradcheckReport gradcheck(Variant variant, std::uint64_t seed, const GradcheckOptions& opt = {},
                          const GradientFn& analytic = {});

}  // namespace imae
