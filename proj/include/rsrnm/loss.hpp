#pragma once

#include <string_view>

namespace rsrnm {

/// Bounded non-convex regression losses.
///   geman_mcclure: l(t) = 2t^2 / (t^2 + 4),  sup = 2
///   welsch:        l(t) = 1 - exp(-t^2 / 2), sup = 1
enum class LossKind { geman_mcclure, welsch };

struct LossValue {
  double value;
  double d1;  // l'(t)
  double d2;  // l''(t)
};

LossValue loss_eval(LossKind kind, double t);

/// Supremum of the loss over the real line.
double loss_supremum(LossKind kind);

std::string_view to_string(LossKind kind);

/// Accepts "geman_mcclure" / "l1" and "welsch" / "l2".
/// Throws std::invalid_argument otherwise.
LossKind parse_loss_kind(std::string_view name);

}  // namespace rsrnm
