#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace sirl {

/// Fixed-bin discretization of a continuous action space. A discrete index
/// selects one output channel and one of `bins` grid values in [-1, 1]; all
/// other channels stay at zero. Channel-major: channel = index / bins,
/// bin = index % bins.
struct DiscretizedActionMap {
  int n_channels = 1;
  int bins = 7;

  DiscretizedActionMap(int n_channels_, int bins_ = 7)
      : n_channels(n_channels_), bins(bins_) {
    if (n_channels < 1 || bins < 2) {
      throw std::invalid_argument("DiscretizedActionMap: need n_channels >= 1, bins >= 2");
    }
  }

  int total_actions() const { return bins * n_channels; }

  int channel_of(int index) const { return index / bins; }
  int bin_of(int index) const { return index % bins; }

  /// Grid value of a bin: 2 * bin / (bins - 1) - 1.
  double bin_value(int bin) const {
    return 2.0 * static_cast<double>(bin) / static_cast<double>(bins - 1) - 1.0;
  }

  Eigen::VectorXd to_continuous(int index) const {
    if (index < 0 || index >= total_actions()) {
      throw std::out_of_range("DiscretizedActionMap: action index out of range");
    }
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n_channels);
    a[channel_of(index)] = bin_value(bin_of(index));
    return a;
  }
};

}  // namespace sirl
