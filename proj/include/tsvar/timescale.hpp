#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsvar {

/// Kind of the gap between two adjacent sample points.
///
/// A SCATTERED gap is a true jump of the time scale: sigma(t_i) = t_{i+1}.
/// A DENSE gap means the two points sample a continuum segment; delta
/// quantities computed across it approximate the classical ones.
enum class GapKind { Scattered, Dense };

struct PointClass {
  bool right_dense = false;
  bool left_dense = false;

  bool right_scattered() const { return !right_dense; }
  bool left_scattered() const { return !left_dense; }
  bool isolated() const { return !left_dense && !right_dense; }
  bool dense() const { return left_dense && right_dense; }
};

class TimeScaleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A bounded time scale represented by finitely many ordered points with a
/// kind per gap.
///
/// Instances are immutable. kappa() returns a prefix view sharing the same
/// point storage, so functions on T^kappa and T^kappa^2 index the same
/// points as functions on T.
class TimeScale {
 public:
  /// All gaps SCATTERED. Requires at least three strictly increasing points.
  static TimeScale from_points(std::vector<double> points);
  /// a, a+h, ..., b with all gaps SCATTERED; (b-a)/h must be integral to 1e-9.
  static TimeScale uniform(double a, double b, double h);
  /// `resolution` uniform points on [a,b] with all gaps DENSE.
  static TimeScale dense_interval(double a, double b, std::size_t resolution);
  /// Explicit points and gap kinds; |gaps| == |points| - 1.
  static TimeScale with_gaps(std::vector<double> points, std::vector<GapKind> gaps);

  std::size_t size() const { return size_; }
  double time(std::size_t i) const;
  double front() const { return time(0); }
  double back() const { return time(size_ - 1); }
  std::span<const double> points() const;
  /// Kind of the gap (t_i, t_{i+1}); i + 1 may reach one past the view when
  /// the underlying storage has that point.
  GapKind gap(std::size_t i) const;
  /// Length of the underlying storage shared by all kappa views.
  std::size_t storage_size() const;
  double storage_time(std::size_t i) const;

  std::size_t sigma(std::size_t i) const;
  std::size_t rho(std::size_t i) const;
  double mu(std::size_t i) const;
  PointClass classify(std::size_t i) const;
  TimeScale kappa() const;
  TimeScale prefix(std::size_t n) const;
  /// The full scale this view was cut from.
  TimeScale parent() const { return prefix_of_storage(); }

  /// True when every gap of the view is SCATTERED.
  bool exact() const;
  /// Largest spacing between adjacent points.
  double max_spacing() const;
  /// Index of the point equal to t within 1e-12*max(1,|t|).
  std::size_t index_of(double t) const;

  bool same_storage(const TimeScale& other) const { return data_ == other.data_; }
  bool operator==(const TimeScale& other) const;

 private:
  struct Storage {
    std::vector<double> points;
    std::vector<GapKind> gaps;
  };

  TimeScale(std::shared_ptr<const Storage> data, std::size_t size)
      : data_(std::move(data)), size_(size) {}
  TimeScale prefix_of_storage() const { return TimeScale(data_, data_->points.size()); }
  void check_index(std::size_t i) const;

  std::shared_ptr<const Storage> data_;
  std::size_t size_ = 0;
};

/// A vector-valued signal sampled on every point of a time scale (or of a
/// kappa view of one).
class GridFunction {
 public:
  GridFunction(TimeScale scale, std::size_t dim, std::vector<double> values,
               bool approximate = false);
  /// Scalar function from one value per point.
  static GridFunction scalar(TimeScale scale, std::vector<double> values,
                             bool approximate = false);
  template <class F>
  static GridFunction sample(const TimeScale& scale, F&& f) {
    std::vector<double> v(scale.size());
    for (std::size_t i = 0; i < scale.size(); ++i) v[i] = f(scale.time(i));
    return scalar(scale, std::move(v));
  }

  const TimeScale& scale() const { return scale_; }
  std::size_t size() const { return scale_.size(); }
  std::size_t dim() const { return dim_; }
  bool approximate() const { return approximate_; }

  std::span<const double> at(std::size_t i) const;
  double operator()(std::size_t i, std::size_t k = 0) const { return values_[i * dim_ + k]; }
  const std::vector<double>& values() const { return values_; }

  /// f^sigma restricted to the same domain.
  GridFunction shifted() const;
  /// Component k as a scalar function.
  GridFunction component(std::size_t k) const;
  /// Restriction to a prefix view of the domain.
  GridFunction restrict_to(const TimeScale& prefix_view) const;

 private:
  TimeScale scale_;
  std::size_t dim_;
  std::vector<double> values_;
  bool approximate_;
};

/// Delta derivative on kappa of f's domain.
///
/// Right-scattered points use the exact forward quotient. Right-dense
/// sampled points use the forward difference along the dense run; the
/// terminal point of a dense run with no right neighbour uses a quadratic
/// ghost extrapolation of the same forward quotient. Dense contributions
/// mark the result approximate.
GridFunction delta_derivative(const GridFunction& f);

/// Delta integral over [t_from, t_to]: sum of f*mu over SCATTERED gaps and
/// trapezoids over DENSE gaps. Indices refer to the shared storage, so the
/// integral of a kappa function may reach the parent's last point.
std::vector<double> delta_integral(const GridFunction& f, std::size_t from, std::size_t to);

/// Running integral t_i -> int_{t_0}^{t_i} f, defined on f's domain.
GridFunction delta_antiderivative(const GridFunction& f);

struct Pushforward {
  TimeScale image;            ///< nu(T), gap kinds inherited
  GridFunction transported;   ///< f o nu^{-1} on the image
  GridFunction nu_delta;      ///< nu^Delta on T^kappa
};

/// Monotone change of time scale by a strictly increasing nu.
Pushforward pushforward(const TimeScale& scale, const GridFunction& nu, const GridFunction& f);

}  // namespace tsvar
