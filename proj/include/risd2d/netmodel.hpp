#pragma once

// Network geometry and Rician channel generation for RIS-aided D2D links.

#include "risd2d/common.hpp"

#include <vector>

namespace risd2d {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

/// Axis-aligned rectangle with its lower-left corner at the origin.
struct Area {
  double width = 200.0;
  double height = 200.0;

  bool contains(Point p) const;
  Point center() const { return {0.5 * width, 0.5 * height}; }
  double diagonal() const;
};

struct DistanceRange {
  double min = 20.0;
  double max = 40.0;
};

/// Node-to-node distances below this floor are clamped before computing path loss.
inline constexpr double kDistanceFloor = 1.0;

struct Topology {
  std::vector<Point> tx;
  std::vector<Point> rx;
  std::vector<Point> ris;
  std::vector<int> elements_per_ris;

  int links() const { return static_cast<int>(tx.size()); }
  int elements() const;
  /// Index of the RIS that owns stacked element n.
  std::vector<int> element_owner() const;
  void validate() const;
};

struct FadingParams {
  double rician_k = 2.0;
  double pathloss_k = 1e-3;
  double pathloss_exp = 4.0;

  void validate() const;
};

/// All complex gains of one fading draw.
///
/// direct(i, l) is the transmitter i -> receiver l gain. Column i of tx_to_ris is the
/// transmitter i -> RIS vector g_i and column l of ris_to_rx is the RIS -> receiver l
/// vector f_l. Both are stacked over all surfaces in the same (RIS, element) order.
struct ChannelRealization {
  CMatrix direct;
  CMatrix tx_to_ris;
  CMatrix ris_to_rx;

  int links() const { return static_cast<int>(direct.rows()); }
  int elements() const { return static_cast<int>(tx_to_ris.rows()); }
  ChannelRealization without_ris() const;
  void validate() const;
};

/// Four surfaces at (+-offset, +-offset) from the center of the area.
std::vector<Point> default_ris_positions(const Area& area, double offset = 50.0);

/// Splits total elements as evenly as possible; earlier surfaces take the remainder.
std::vector<int> split_elements(int total, int surfaces);

/// Transmitters uniform in the area; each receiver uniform on the annulus d_range around
/// its transmitter (rejection-sampled to stay inside). Surface positions pass through.
Topology sample_topology(const Area& area, int links, std::vector<Point> ris_positions,
                         std::vector<int> elements_per_ris, DistanceRange d_range, Rng& rng);

/// Large-scale amplitude-squared gain k * d^-chi. Throws for d <= 0.
double path_loss_gain(double d, const FadingParams& fading);

ChannelRealization realize_channels(const Topology& topology, const FadingParams& fading,
                                    Rng& rng);

}  // namespace risd2d
