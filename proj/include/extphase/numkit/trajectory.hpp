#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"

namespace xps::numkit {

// Samples (s, state, d state/ds) with cubic Hermite dense output.
// Immutable once built; use Trajectory::Builder to assemble one.
class Trajectory {
 public:
  class Builder;

  Trajectory() = default;

  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& s_label() const { return s_label_; }
  std::size_t size() const { return s_.size(); }
  std::size_t dim() const { return labels_.size(); }
  bool empty() const { return s_.empty(); }

  double s(std::size_t i) const { return s_[i]; }
  std::span<const double> state(std::size_t i) const {
    return {&data_[i * dim()], dim()};
  }
  std::span<const double> derivative(std::size_t i) const {
    return {&deriv_[i * dim()], dim()};
  }
  double at(std::size_t i, std::size_t column) const { return data_[i * dim() + column]; }
  double s_front() const { return s_.front(); }
  double s_back() const { return s_.back(); }

  std::size_t column(std::string_view label) const {
    for (std::size_t c = 0; c < labels_.size(); ++c)
      if (labels_[c] == label) return c;
    throw Error("no column named '" + std::string(label) + "'");
  }

  std::vector<double> column_values(std::size_t c) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = at(i, c);
    return out;
  }

  bool contains(double s) const {
    const double lo = std::min(s_.front(), s_.back());
    const double hi = std::max(s_.front(), s_.back());
    return s >= lo && s <= hi;
  }

  // Cubic Hermite interpolation of the state.
  std::vector<double> interpolate(double s) const { return hermite(s, 0); }
  // Derivative of the Hermite interpolant.
  std::vector<double> interpolate_derivative(double s) const { return hermite(s, 1); }
  // Second derivative of the Hermite interpolant (piecewise linear).
  std::vector<double> interpolate_second(double s) const { return hermite(s, 2); }

  // Second derivative at sample i from the derivative of the quartic through
  // the five nearest derivative samples. Accuracy O(h^4).
  std::vector<double> second_derivative_at(std::size_t i) const {
    if (size() < 5) throw Error("need at least five samples for second derivatives");
    std::size_t lo = i < 2 ? 0 : i - 2;
    if (lo + 5 > size()) lo = size() - 5;
    const double x = s_[i];
    std::vector<double> w(5, 0.0);
    // derivative of Lagrange basis l_j at x
    for (std::size_t j = 0; j < 5; ++j) {
      const double xj = s_[lo + j];
      double sum = 0.0;
      for (std::size_t m = 0; m < 5; ++m) {
        if (m == j) continue;
        double prod = 1.0 / (xj - s_[lo + m]);
        for (std::size_t l = 0; l < 5; ++l) {
          if (l == j || l == m) continue;
          prod *= (x - s_[lo + l]) / (xj - s_[lo + l]);
        }
        sum += prod;
      }
      w[j] = sum;
    }
    std::vector<double> out(dim(), 0.0);
    for (std::size_t j = 0; j < 5; ++j) {
      auto d = derivative(lo + j);
      for (std::size_t c = 0; c < dim(); ++c) out[c] += w[j] * d[c];
    }
    return out;
  }

  void write_csv(std::ostream& os) const {
    os << s_label_;
    for (const auto& l : labels_) os << ',' << l;
    os << '\n';
    char buf[40];
    for (std::size_t i = 0; i < size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", s_[i]);
      os << buf;
      for (double v : state(i)) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
      }
      os << '\n';
    }
  }

 private:
  std::size_t segment(double s) const {
    if (size() < 2) throw Error("interpolation needs at least two samples");
    if (!contains(s)) throw Error("interpolation point outside trajectory span");
    const bool forward = s_.back() > s_.front();
    auto it = forward ? std::upper_bound(s_.begin(), s_.end(), s)
                      : std::upper_bound(s_.begin(), s_.end(), s, std::greater<>());
    std::size_t k = static_cast<std::size_t>(it - s_.begin());
    if (k == 0) k = 1;
    if (k >= size()) k = size() - 1;
    return k - 1;
  }

  std::vector<double> hermite(double s, int order) const {
    const std::size_t k = segment(s);
    const double h = s_[k + 1] - s_[k];
    const double u = (s - s_[k]) / h;
    double h00, h10, h01, h11;
    if (order == 0) {
      h00 = (1 + 2 * u) * (1 - u) * (1 - u);
      h10 = u * (1 - u) * (1 - u) * h;
      h01 = u * u * (3 - 2 * u);
      h11 = u * u * (u - 1) * h;
    } else if (order == 1) {
      h00 = 6 * u * (u - 1) / h;
      h10 = (1 - 4 * u + 3 * u * u);
      h01 = -6 * u * (u - 1) / h;
      h11 = (3 * u * u - 2 * u);
    } else {
      h00 = (12 * u - 6) / (h * h);
      h10 = (6 * u - 4) / h;
      h01 = (6 - 12 * u) / (h * h);
      h11 = (6 * u - 2) / h;
    }
    auto y0 = state(k), y1 = state(k + 1), d0 = derivative(k), d1 = derivative(k + 1);
    std::vector<double> out(dim());
    for (std::size_t c = 0; c < dim(); ++c)
      out[c] = h00 * y0[c] + h10 * d0[c] + h01 * y1[c] + h11 * d1[c];
    return out;
  }

  std::vector<std::string> labels_;
  std::string s_label_ = "s";
  std::vector<double> s_;
  std::vector<double> data_;
  std::vector<double> deriv_;
};

class Trajectory::Builder {
 public:
  explicit Builder(std::vector<std::string> labels, std::string s_label = "s") {
    t_.labels_ = std::move(labels);
    t_.s_label_ = std::move(s_label);
  }

  void push(double s, std::span<const double> state, std::span<const double> deriv) {
    if (state.size() != t_.dim() || deriv.size() != t_.dim())
      throw Error("sample length does not match labels");
    if (t_.size() >= 1) {
      const double last = t_.s_.back();
      if (s == last) throw Error("samples must be strictly monotone in s");
      if (t_.size() >= 2) {
        const bool forward = t_.s_[1] > t_.s_[0];
        if ((s > last) != forward) throw Error("samples must be strictly monotone in s");
      }
    }
    t_.s_.push_back(s);
    t_.data_.insert(t_.data_.end(), state.begin(), state.end());
    t_.deriv_.insert(t_.deriv_.end(), deriv.begin(), deriv.end());
  }

  std::size_t size() const { return t_.size(); }
  Trajectory finish() && { return std::move(t_); }
  Trajectory snapshot() const { return t_; }

 private:
  Trajectory t_;
};

}  // namespace xps::numkit
