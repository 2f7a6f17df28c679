#ifndef AFDI_CONE_HPP_
#define AFDI_CONE_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace afdi {

/// One factor of the latent constraint product of a CCG.
///
/// The latent vector of a CCG lives in a Cartesian product of simple sets;
/// each ConeSpec describes one factor and the number of latent coordinates
/// it consumes.  The SOC variant uses the convention
///   || xi_1, ..., xi_{dim-1} ||_2 <= xi_dim,
/// i.e. the last coordinate bounds the Euclidean norm of the head.
class ConeSpec {
public:
  enum class Kind { Free, NonNegative, Box, Ball2, SOC };

  static ConeSpec free(int dim) { return ConeSpec(Kind::Free, dim); }
  static ConeSpec nonnegative(int dim) { return ConeSpec(Kind::NonNegative, dim); }
  static ConeSpec box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    ConeSpec c(Kind::Box, static_cast<int>(lo.size()));
    if (lo.size() != hi.size())
      throw std::invalid_argument("ConeSpec::box: lo/hi length mismatch");
    if (((hi - lo).array() < 0.0).any())
      throw std::invalid_argument("ConeSpec::box: requires lo <= hi elementwise");
    c.lo_ = lo;
    c.hi_ = hi;
    return c;
  }
  /// Symmetric unit box [-1, 1]^dim.
  static ConeSpec unit_box(int dim) {
    return box(Eigen::VectorXd::Constant(dim, -1.0), Eigen::VectorXd::Constant(dim, 1.0));
  }
  static ConeSpec ball2(int dim, double radius) {
    if (radius < 0.0) throw std::invalid_argument("ConeSpec::ball2: radius must be >= 0");
    ConeSpec c(Kind::Ball2, dim);
    c.radius_ = radius;
    return c;
  }
  static ConeSpec soc(int dim) {
    if (dim < 2) throw std::invalid_argument("ConeSpec::soc: requires dim >= 2");
    return ConeSpec(Kind::SOC, dim);
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  double radius() const { return radius_; }

  bool is_cone() const {
    return kind_ == Kind::Free || kind_ == Kind::NonNegative || kind_ == Kind::SOC;
  }

  /// Largest Euclidean norm attainable inside this factor; throws when unbounded.
  double max_norm() const {
    switch (kind_) {
      case Kind::Box:
        return lo_.cwiseAbs().cwiseMax(hi_.cwiseAbs()).norm();
      case Kind::Ball2:
        return radius_;
      default:
        throw std::invalid_argument("ConeSpec::max_norm: unbounded cone variant");
    }
  }

  std::string name() const {
    switch (kind_) {
      case Kind::Free: return "free";
      case Kind::NonNegative: return "nonneg";
      case Kind::Box: return "box";
      case Kind::Ball2: return "ball2";
      case Kind::SOC: return "soc";
    }
    return "?";
  }

  bool operator==(const ConeSpec& o) const {
    return kind_ == o.kind_ && dim_ == o.dim_ && radius_ == o.radius_ &&
           lo_.size() == o.lo_.size() && lo_ == o.lo_ && hi_ == o.hi_;
  }

private:
  ConeSpec(Kind k, int dim) : kind_(k), dim_(dim) {
    if (dim < 1) throw std::invalid_argument("ConeSpec: dim must be >= 1");
  }

  Kind kind_;
  int dim_;
  Eigen::VectorXd lo_, hi_;  // Box only
  double radius_ = 0.0;      // Ball2 only
};

inline int total_dim(const std::vector<ConeSpec>& cones) {
  int n = 0;
  for (const auto& c : cones) n += c.dim();
  return n;
}

}  // namespace afdi

#endif  // AFDI_CONE_HPP_
