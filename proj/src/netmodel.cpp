#include "risd2d/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace risd2d {

namespace {

constexpr int kPlacementAttempts = 100000;

cdouble rician_draw(double gain, double k_factor, Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double los_phase = phase(rng);
  const cdouble scatter = circular_gaussian(rng);
  const double los_weight = std::isinf(k_factor) ? 1.0 : std::sqrt(k_factor / (1.0 + k_factor));
  const double nlos_weight = std::isinf(k_factor) ? 0.0 : std::sqrt(1.0 / (1.0 + k_factor));
  return std::sqrt(gain) * (los_weight * std::polar(1.0, los_phase) + nlos_weight * scatter);
}

double floored(double d) { return std::max(d, kDistanceFloor); }

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool Area::contains(Point p) const {
  return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
}

double Area::diagonal() const { return std::hypot(width, height); }

int Topology::elements() const {
  return std::accumulate(elements_per_ris.begin(), elements_per_ris.end(), 0);
}

std::vector<int> Topology::element_owner() const {
  std::vector<int> owner;
  owner.reserve(static_cast<std::size_t>(elements()));
  for (std::size_t m = 0; m < elements_per_ris.size(); ++m) {
    owner.insert(owner.end(), static_cast<std::size_t>(elements_per_ris[m]), static_cast<int>(m));
  }
  return owner;
}

void Topology::validate() const {
  if (tx.empty() || tx.size() != rx.size()) {
    throw std::invalid_argument("topology needs equal, nonzero transmitter and receiver counts");
  }
  if (ris.size() != elements_per_ris.size()) {
    throw std::invalid_argument("topology: one element count per RIS is required");
  }
  for (int n : elements_per_ris) {
    if (n < 0) throw std::invalid_argument("topology: negative element count");
  }
}

void FadingParams::validate() const {
  if (!(pathloss_k > 0.0)) throw std::invalid_argument("path-loss constant must be positive");
  if (!(pathloss_exp > 0.0)) throw std::invalid_argument("path-loss exponent must be positive");
  if (!(rician_k >= 0.0)) throw std::invalid_argument("Rician factor must be nonnegative");
}

ChannelRealization ChannelRealization::without_ris() const {
  const int L = links();
  return {direct, CMatrix(0, L), CMatrix(0, L)};
}

void ChannelRealization::validate() const {
  const Eigen::Index L = direct.rows();
  if (direct.cols() != L || tx_to_ris.cols() != L || ris_to_rx.cols() != L ||
      tx_to_ris.rows() != ris_to_rx.rows()) {
    throw std::invalid_argument("channel realization has inconsistent dimensions");
  }
  if (!direct.allFinite() || !tx_to_ris.allFinite() || !ris_to_rx.allFinite()) {
    throw std::invalid_argument("channel realization has non-finite entries");
  }
}

std::vector<Point> default_ris_positions(const Area& area, double offset) {
  const Point c = area.center();
  return {{c.x - offset, c.y - offset},
          {c.x + offset, c.y - offset},
          {c.x - offset, c.y + offset},
          {c.x + offset, c.y + offset}};
}

std::vector<int> split_elements(int total, int surfaces) {
  if (surfaces <= 0) {
    if (total != 0) throw std::invalid_argument("cannot split elements across zero surfaces");
    return {};
  }
  std::vector<int> counts(static_cast<std::size_t>(surfaces), total / surfaces);
  for (int m = 0; m < total % surfaces; ++m) ++counts[static_cast<std::size_t>(m)];
  return counts;
}

Topology sample_topology(const Area& area, int links, std::vector<Point> ris_positions,
                         std::vector<int> elements_per_ris, DistanceRange d_range, Rng& rng) {
  if (links < 1) throw std::invalid_argument("sample_topology: need at least one link");
  if (!(d_range.min > 0.0) || d_range.max < d_range.min || d_range.max >= area.diagonal()) {
    throw std::invalid_argument("sample_topology: distance range must lie in (0, diagonal)");
  }
  std::uniform_real_distribution<double> ux(0.0, area.width);
  std::uniform_real_distribution<double> uy(0.0, area.height);
  std::uniform_real_distribution<double> ur2(d_range.min * d_range.min, d_range.max * d_range.max);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);

  Topology topo;
  topo.ris = std::move(ris_positions);
  topo.elements_per_ris = std::move(elements_per_ris);
  for (int l = 0; l < links; ++l) {
    const Point t{ux(rng), uy(rng)};
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const double r = std::sqrt(ur2(rng));
      const double a = angle(rng);
      const Point candidate{t.x + r * std::cos(a), t.y + r * std::sin(a)};
      if (area.contains(candidate)) {
        topo.tx.push_back(t);
        topo.rx.push_back(candidate);
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw std::runtime_error("sample_topology: could not place receiver of link " +
                               std::to_string(l) + " inside the area");
    }
  }
  topo.validate();
  return topo;
}

double path_loss_gain(double d, const FadingParams& fading) {
  if (!(d > 0.0)) throw std::invalid_argument("path_loss_gain: distance must be positive");
  return fading.pathloss_k * std::pow(d, -fading.pathloss_exp);
}

ChannelRealization realize_channels(const Topology& topology, const FadingParams& fading,
                                    Rng& rng) {
  topology.validate();
  fading.validate();
  const int L = topology.links();
  const int N = topology.elements();
  const std::vector<int> owner = topology.element_owner();
  const double K = fading.rician_k;

  ChannelRealization chan;
  chan.direct.resize(L, L);
  chan.tx_to_ris.resize(N, L);
  chan.ris_to_rx.resize(N, L);

  // Direct links are drawn first so they do not depend on the element count.
  for (int i = 0; i < L; ++i) {
    for (int l = 0; l < L; ++l) {
      const double d = floored(distance(topology.tx[i], topology.rx[l]));
      chan.direct(i, l) = rician_draw(path_loss_gain(d, fading), K, rng);
    }
  }
  for (int i = 0; i < L; ++i) {
    for (int n = 0; n < N; ++n) {
      const double d = floored(distance(topology.tx[i], topology.ris[owner[n]]));
      chan.tx_to_ris(n, i) = rician_draw(path_loss_gain(d, fading), K, rng);
    }
  }
  for (int l = 0; l < L; ++l) {
    for (int n = 0; n < N; ++n) {
      const double d = floored(distance(topology.rx[l], topology.ris[owner[n]]));
      chan.ris_to_rx(n, l) = rician_draw(path_loss_gain(d, fading), K, rng);
    }
  }
  return chan;
}

}  // namespace risd2d
