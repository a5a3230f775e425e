#include "rsrnm/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rsrnm {

LossValue loss_eval(LossKind kind, double t) {
  const double t2 = t * t;
  switch (kind) {
    case LossKind::geman_mcclure: {
      const double q = t2 + 4.0;
      return {2.0 * t2 / q, 16.0 * t / (q * q), (64.0 - 48.0 * t2) / (q * q * q)};
    }
    case LossKind::welsch: {
      const double e = std::exp(-0.5 * t2);
      // -expm1 keeps full relative precision for small |t|.
      return {-std::expm1(-0.5 * t2), t * e, (1.0 - t2) * e};
    }
  }
  throw std::invalid_argument("unknown loss kind");
}

double loss_supremum(LossKind kind) {
  return kind == LossKind::geman_mcclure ? 2.0 : 1.0;
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::geman_mcclure ? "geman_mcclure" : "welsch";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "geman_mcclure" || name == "l1") return LossKind::geman_mcclure;
  if (name == "welsch" || name == "l2") return LossKind::welsch;
  throw std::invalid_argument("unknown loss '" + std::string(name) +
                              "' (expected geman_mcclure or welsch)");
}

}  // namespace rsrnm
