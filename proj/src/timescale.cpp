#include "tsvar/timescale.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace tsvar {

namespace {

void check_points(const std::vector<double>& points) {
  if (points.size() < 3) {
    throw TimeScaleError(fmt::format("a time scale needs at least 3 points, got {}", points.size()));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw TimeScaleError(fmt::format("point {} is not finite", i));
    if (i > 0 && !(points[i] > points[i - 1])) {
      throw TimeScaleError(fmt::format("points must be strictly increasing (index {}: {} after {})",
                                       i, points[i], points[i - 1]));
    }
  }
}

}  // namespace

TimeScale TimeScale::with_gaps(std::vector<double> points, std::vector<GapKind> gaps) {
  check_points(points);
  if (gaps.size() + 1 != points.size()) {
    throw TimeScaleError(
        fmt::format("expected {} gap kinds, got {}", points.size() - 1, gaps.size()));
  }
  auto n = points.size();
  auto data = std::make_shared<Storage>(Storage{std::move(points), std::move(gaps)});
  return TimeScale(std::move(data), n);
}

TimeScale TimeScale::from_points(std::vector<double> points) {
  std::vector<GapKind> gaps(points.empty() ? 0 : points.size() - 1, GapKind::Scattered);
  return with_gaps(std::move(points), std::move(gaps));
}

TimeScale TimeScale::uniform(double a, double b, double h) {
  if (!(a < b)) throw TimeScaleError("uniform scale needs a < b");
  if (!(h > 0)) throw TimeScaleError("uniform scale needs h > 0");
  double steps = (b - a) / h;
  double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9) {
    throw TimeScaleError(fmt::format("span {} is not an integral multiple of h = {}", b - a, h));
  }
  auto count = static_cast<std::size_t>(rounded);
  std::vector<double> points(count + 1);
  for (std::size_t k = 0; k <= count; ++k) points[k] = a + static_cast<double>(k) * h;
  points.back() = b;
  return from_points(std::move(points));
}

TimeScale TimeScale::dense_interval(double a, double b, std::size_t resolution) {
  if (!(a < b)) throw TimeScaleError("dense interval needs a < b");
  if (resolution < 2) throw TimeScaleError("dense interval needs resolution >= 2");
  if (resolution < 3) throw TimeScaleError("a time scale needs at least 3 points");
  std::vector<double> points(resolution);
  double h = (b - a) / static_cast<double>(resolution - 1);
  for (std::size_t k = 0; k < resolution; ++k) points[k] = a + static_cast<double>(k) * h;
  points.back() = b;
  return with_gaps(std::move(points), std::vector<GapKind>(resolution - 1, GapKind::Dense));
}

void TimeScale::check_index(std::size_t i) const {
  if (i >= size_) {
    throw std::out_of_range(fmt::format("point index {} out of range (size {})", i, size_));
  }
}

double TimeScale::time(std::size_t i) const {
  check_index(i);
  return data_->points[i];
}

std::span<const double> TimeScale::points() const {
  return std::span<const double>(data_->points.data(), size_);
}

GapKind TimeScale::gap(std::size_t i) const {
  if (i >= data_->gaps.size()) throw std::out_of_range(fmt::format("gap index {} out of range", i));
  return data_->gaps[i];
}

std::size_t TimeScale::storage_size() const { return data_->points.size(); }

double TimeScale::storage_time(std::size_t i) const {
  if (i >= data_->points.size()) throw std::out_of_range(fmt::format("point index {} out of range", i));
  return data_->points[i];
}

std::size_t TimeScale::sigma(std::size_t i) const {
  check_index(i);
  if (i + 1 == size_) return i;
  return data_->gaps[i] == GapKind::Scattered ? i + 1 : i;
}

std::size_t TimeScale::rho(std::size_t i) const {
  check_index(i);
  if (i == 0) return 0;
  return data_->gaps[i - 1] == GapKind::Scattered ? i - 1 : i;
}

double TimeScale::mu(std::size_t i) const {
  auto s = sigma(i);
  return s == i ? 0.0 : data_->points[s] - data_->points[i];
}

PointClass TimeScale::classify(std::size_t i) const {
  PointClass c;
  c.right_dense = sigma(i) == i;
  c.left_dense = rho(i) == i;
  return c;
}

TimeScale TimeScale::kappa() const {
  if (size_ < 2) throw TimeScaleError("kappa needs at least 2 points");
  if (data_->gaps[size_ - 2] == GapKind::Scattered) return TimeScale(data_, size_ - 1);
  return *this;
}

TimeScale TimeScale::prefix(std::size_t n) const {
  if (n == 0 || n > size_) throw std::out_of_range(fmt::format("prefix length {} invalid", n));
  return TimeScale(data_, n);
}

bool TimeScale::exact() const {
  for (std::size_t i = 0; i + 1 < size_; ++i) {
    if (data_->gaps[i] == GapKind::Dense) return false;
  }
  return true;
}

double TimeScale::max_spacing() const {
  double h = 0;
  for (std::size_t i = 0; i + 1 < size_; ++i) h = std::max(h, data_->points[i + 1] - data_->points[i]);
  return h;
}

std::size_t TimeScale::index_of(double t) const {
  double tol = 1e-12 * std::max(1.0, std::abs(t));
  auto pts = points();
  auto it = std::lower_bound(pts.begin(), pts.end(), t - tol);
  if (it == pts.end() || std::abs(*it - t) > tol) {
    throw TimeScaleError(fmt::format("{} is not a point of the time scale", t));
  }
  return static_cast<std::size_t>(it - pts.begin());
}

bool TimeScale::operator==(const TimeScale& other) const {
  if (size_ != other.size_) return false;
  for (std::size_t i = 0; i < size_; ++i) {
    if (data_->points[i] != other.data_->points[i]) return false;
    if (i + 1 < size_ && data_->gaps[i] != other.data_->gaps[i]) return false;
  }
  return true;
}

GridFunction::GridFunction(TimeScale scale, std::size_t dim, std::vector<double> values,
                           bool approximate)
    : scale_(std::move(scale)), dim_(dim), values_(std::move(values)), approximate_(approximate) {
  if (dim_ == 0) throw std::invalid_argument("grid function dimension must be >= 1");
  if (values_.size() != scale_.size() * dim_) {
    throw std::invalid_argument(fmt::format("grid function needs {} values, got {}",
                                            scale_.size() * dim_, values_.size()));
  }
}

GridFunction GridFunction::scalar(TimeScale scale, std::vector<double> values, bool approximate) {
  return GridFunction(std::move(scale), 1, std::move(values), approximate);
}

std::span<const double> GridFunction::at(std::size_t i) const {
  if (i >= size()) throw std::out_of_range(fmt::format("grid index {} out of range", i));
  return std::span<const double>(values_.data() + i * dim_, dim_);
}

GridFunction GridFunction::shifted() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < size(); ++i) {
    auto s = scale_.sigma(i);
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(s * dim_), dim_,
                out.begin() + static_cast<std::ptrdiff_t>(i * dim_));
  }
  return GridFunction(scale_, dim_, std::move(out), approximate_);
}

GridFunction GridFunction::component(std::size_t k) const {
  if (k >= dim_) throw std::out_of_range("component out of range");
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = (*this)(i, k);
  return scalar(scale_, std::move(out), approximate_);
}

GridFunction GridFunction::restrict_to(const TimeScale& prefix_view) const {
  if (!prefix_view.same_storage(scale_) || prefix_view.size() > size()) {
    throw std::invalid_argument("restriction target is not a prefix of the domain");
  }
  std::vector<double> out(values_.begin(),
                          values_.begin() + static_cast<std::ptrdiff_t>(prefix_view.size() * dim_));
  return GridFunction(prefix_view, dim_, std::move(out), approximate_);
}

GridFunction delta_derivative(const GridFunction& f) {
  const auto& scale = f.scale();
  auto domain = scale.kappa();
  const auto n = scale.size();
  const auto dim = f.dim();
  bool approximate = f.approximate();
  std::vector<double> out(domain.size() * dim);

  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (i + 1 < n) {
      double h = scale.time(i + 1) - scale.time(i);
      if (scale.gap(i) == GapKind::Dense) approximate = true;
      for (std::size_t k = 0; k < dim; ++k) out[i * dim + k] = (f(i + 1, k) - f(i, k)) / h;
      continue;
    }
    // terminal point of a dense run: forward quotient of the quadratic
    // through the last three samples, or a backward quotient if only two
    approximate = true;
    double x2 = scale.time(i), x1 = scale.time(i - 1);
    bool quadratic = i >= 2 && scale.gap(i - 2) == GapKind::Dense;
    for (std::size_t k = 0; k < dim; ++k) {
      double d12 = (f(i, k) - f(i - 1, k)) / (x2 - x1);
      if (!quadratic) {
        out[i * dim + k] = d12;
        continue;
      }
      double x0 = scale.time(i - 2);
      double d01 = (f(i - 1, k) - f(i - 2, k)) / (x1 - x0);
      double d012 = (d12 - d01) / (x2 - x0);
      double slope_at_end = d01 + d012 * (2 * x2 - x0 - x1);
      out[i * dim + k] = slope_at_end + d012 * (x2 - x1);
    }
  }
  return GridFunction(domain, dim, std::move(out), approximate);
}

std::vector<double> delta_integral(const GridFunction& f, std::size_t from, std::size_t to) {
  const auto& scale = f.scale();
  if (from > to) throw std::invalid_argument("delta_integral needs from <= to");
  if (to >= scale.storage_size()) throw std::out_of_range("integration bound out of range");
  const auto dim = f.dim();
  std::vector<double> sum(dim, 0.0);
  for (std::size_t i = from; i < to; ++i) {
    if (i >= f.size()) throw std::out_of_range(fmt::format("integrand undefined at index {}", i));
    double h = scale.storage_time(i + 1) - scale.storage_time(i);
    if (scale.gap(i) == GapKind::Scattered) {
      for (std::size_t k = 0; k < dim; ++k) sum[k] += f(i, k) * h;
    } else {
      if (i + 1 >= f.size()) {
        throw std::out_of_range(fmt::format("integrand undefined at index {}", i + 1));
      }
      for (std::size_t k = 0; k < dim; ++k) sum[k] += 0.5 * (f(i, k) + f(i + 1, k)) * h;
    }
  }
  return sum;
}

GridFunction delta_antiderivative(const GridFunction& f) {
  const auto& scale = f.scale();
  const auto dim = f.dim();
  std::vector<double> out(f.size() * dim, 0.0);
  bool approximate = f.approximate();
  for (std::size_t i = 1; i < f.size(); ++i) {
    double h = scale.time(i) - scale.time(i - 1);
    bool dense = scale.gap(i - 1) == GapKind::Dense;
    approximate = approximate || dense;
    for (std::size_t k = 0; k < dim; ++k) {
      double piece = dense ? 0.5 * (f(i - 1, k) + f(i, k)) * h : f(i - 1, k) * h;
      out[i * dim + k] = out[(i - 1) * dim + k] + piece;
    }
  }
  return GridFunction(scale, dim, std::move(out), approximate);
}

Pushforward pushforward(const TimeScale& scale, const GridFunction& nu, const GridFunction& f) {
  if (nu.size() != scale.size() || f.size() != scale.size() || nu.dim() != 1 || f.dim() != 1) {
    throw std::invalid_argument("pushforward needs scalar functions on the given scale");
  }
  std::vector<double> image_points(scale.size());
  std::vector<GapKind> gaps(scale.size() - 1);
  for (std::size_t i = 0; i < scale.size(); ++i) {
    image_points[i] = nu(i);
    if (i > 0 && !(nu(i) > nu(i - 1))) {
      throw TimeScaleError(fmt::format("nu is not strictly increasing at index {}", i));
    }
    if (i + 1 < scale.size()) gaps[i] = scale.gap(i);
  }
  auto image = TimeScale::with_gaps(std::move(image_points), std::move(gaps));
  auto transported = GridFunction::scalar(image, f.values(), f.approximate());
  auto nu_on_scale = GridFunction::scalar(scale, nu.values(), nu.approximate());
  return Pushforward{image, std::move(transported), delta_derivative(nu_on_scale)};
}

}  // namespace tsvar
