#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace fairalloc {

// Holder-mean welfare exponent q in [-inf, 1].  The exact cases q = -inf,
// q = 0 and q = 1 carry their own tags so no arithmetic ever touches an
// infinite exponent or divides by a nearly-zero one.
class WelfareParam {
 public:
  enum class Kind { Egalitarian, Power, Nash, Utilitarian };

  static WelfareParam egalitarian() { return {Kind::Egalitarian, 0.0}; }
  static WelfareParam nash() { return {Kind::Nash, 0.0}; }
  static WelfareParam utilitarian() { return {Kind::Utilitarian, 1.0}; }

  // Maps -inf, |q| < 1e-9 and 1 onto their exact cases; rejects q > 1 and NaN.
  static WelfareParam holder(double q) {
    if (std::isnan(q) || q > 1.0)
      throw std::invalid_argument("welfare exponent must lie in [-inf, 1]");
    if (std::isinf(q)) return egalitarian();
    if (std::abs(q) < kNashBand) return nash();
    if (q == 1.0) return utilitarian();
    return {Kind::Power, q};
  }

  // Accepts a finite decimal or the literal token "-inf".
  static WelfareParam parse(const std::string& text) {
    if (text == "-inf") return egalitarian();
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
      throw std::invalid_argument("cannot parse welfare exponent '" + text + "'");
    return holder(v);
  }

  std::string str() const {
    if (kind_ == Kind::Egalitarian) return "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", exponent());
    return buf;
  }

  Kind kind() const { return kind_; }
  bool is_egalitarian() const { return kind_ == Kind::Egalitarian; }
  bool is_smooth() const { return kind_ != Kind::Egalitarian; }

  // Finite exponent (0 for Nash, 1 for utilitarian); meaningless for -inf.
  double exponent() const {
    switch (kind_) {
      case Kind::Egalitarian:
        throw std::logic_error("egalitarian welfare has no finite exponent");
      case Kind::Nash: return 0.0;
      case Kind::Utilitarian: return 1.0;
      case Kind::Power: return q_;
    }
    return 0.0;
  }

  bool operator==(const WelfareParam& o) const {
    return kind_ == o.kind_ && (kind_ != Kind::Power || q_ == o.q_);
  }
  bool operator!=(const WelfareParam& o) const { return !(*this == o); }

 private:
  static constexpr double kNashBand = 1e-9;
  WelfareParam(Kind k, double q) : kind_(k), q_(q) {}
  Kind kind_;
  double q_;
};

namespace detail {
inline void require_utilities(const Eigen::Ref<const Eigen::VectorXd>& B) {
  if (B.size() == 0)
    throw std::invalid_argument("utility vector must be non-empty");
  if ((B.array() < 0.0).any() || !B.allFinite())
    throw std::invalid_argument("utilities must be finite and nonnegative");
}
}  // namespace detail

// Normalized Holder mean of the utility vector: min for q = -inf, geometric
// mean for q = 0, power mean otherwise; w(u * ones) = u for every q.
inline double welfare_value(const WelfareParam& w,
                            const Eigen::Ref<const Eigen::VectorXd>& B) {
  detail::require_utilities(B);
  switch (w.kind()) {
    case WelfareParam::Kind::Egalitarian:
      return B.minCoeff();
    case WelfareParam::Kind::Utilitarian:
      return B.mean();
    case WelfareParam::Kind::Nash: {
      if ((B.array() == 0.0).any()) return 0.0;
      return std::exp(B.array().log().mean());
    }
    case WelfareParam::Kind::Power: {
      const double q = w.exponent();
      // Factoring out an extreme keeps every ratio power inside [0, 1], so
      // the sum can neither overflow nor lose the dominant term.
      if (q < 0.0) {
        const double m = B.minCoeff();
        if (m == 0.0) return 0.0;
        const double s = (B.array() / m).pow(q).mean();
        return m * std::pow(s, 1.0 / q);
      }
      const double m = B.maxCoeff();
      if (m == 0.0) return 0.0;
      const double s = (B.array() / m).pow(q).mean();
      return m * std::pow(s, 1.0 / q);
    }
  }
  return 0.0;
}

// Gradient of welfare_value.  Requires a smooth parameter; for q <= 0 all
// utilities must be strictly positive.  For q in (0, 1) a zero utility yields
// a +inf component (the mathematical limit).
inline Eigen::VectorXd welfare_gradient(const WelfareParam& w,
                                        const Eigen::Ref<const Eigen::VectorXd>& B) {
  detail::require_utilities(B);
  const auto n = B.size();
  switch (w.kind()) {
    case WelfareParam::Kind::Egalitarian:
      throw std::invalid_argument("egalitarian welfare is not differentiable");
    case WelfareParam::Kind::Utilitarian:
      return Eigen::VectorXd::Constant(n, 1.0 / double(n));
    case WelfareParam::Kind::Nash: {
      if ((B.array() == 0.0).any())
        throw std::invalid_argument("Nash welfare gradient needs strictly positive utilities");
      const double v = welfare_value(w, B);
      return (v / double(n)) * B.array().inverse().matrix();
    }
    case WelfareParam::Kind::Power: {
      const double q = w.exponent();
      if (q < 0.0 && (B.array() == 0.0).any())
        throw std::invalid_argument("welfare gradient with q < 0 needs strictly positive utilities");
      const double v = welfare_value(w, B);
      Eigen::VectorXd g(n);
      if (v == 0.0) {  // q in (0,1) with an all-zero vector
        g.setConstant(std::numeric_limits<double>::infinity());
        return g;
      }
      for (Eigen::Index i = 0; i < n; ++i)
        g[i] = std::pow(B[i] / v, q - 1.0) / double(n);
      return g;
    }
  }
  return Eigen::VectorXd();
}

}  // namespace fairalloc
