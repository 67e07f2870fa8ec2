#pragma once

// Random scenario generation: cell geometry, distance-based path loss and
// i.i.d. Rayleigh small-scale fading, all deterministic in the seed.

#include <cstdint>
#include <iosfwd>

#include "irscr/types.hpp"

namespace irscr {

// Large-scale model for the reflected (BS -> IRS -> user) link.
//  - product:   each hop carries its own free-space-anchored path loss; the
//               cascade is the product. Physically conservative: the double
//               attenuation makes a passive surface nearly invisible at
//               cell-scale distances unless it has hundreds of elements.
//  - composite: the cascade is anchored to the total travelled distance
//               (gain of the two-hop link = path_gain(d1 + d2)); the BS->IRS
//               matrix keeps its own path loss and the second hop carries the
//               ratio. This is the conventional single-reflection model in
//               which a surface of a few elements is already useful.
enum class IrsLinkModel { product, composite };

struct GeometryConfig {
  double cell_radius = 100.0;     // meters, both cells
  double bs_separation = 180.0;   // meters, BS to primary transmitter
  double irs_position = 0.5;      // fraction along the BS -> primary-tx line
  double carrier_hz = 2.5e9;
  double pathloss_exponent = 3.5;
  double bs_gain_dbi = 10.0;
  IrsLinkModel irs_link_model = IrsLinkModel::composite;
  double noise_power_dbm = -90.0;     // equivalent noise at each SU
  double pu_noise_power_dbm = -90.0;  // carried into ChannelSet, unused downstream
  double reference_distance = 1.0;    // meters, path-loss anchor

  void validate() const;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double dist(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct ScenarioRealization {
  ScenarioDims dims;
  GeometryConfig geometry;
  Position bs;          // secondary BS, origin
  Position primary_tx;  // primary transmitter
  Position irs;
  std::vector<Position> su;  // in the secondary cell
  std::vector<Position> pu;  // in the primary cell
  ChannelSet channels;
  std::uint64_t seed = 0;
};

// Free-space-referenced power gain G_ref * d^{-alpha} with
// G_ref = (c / (4 pi f_c))^2. BS antenna gain is not included here; it is
// applied once per BS-side link endpoint when channels are assembled.
double path_gain(double distance, const GeometryConfig& cfg);

// Draw user positions uniformly in their cells (SUs around the BS, PUs around
// the primary transmitter) and place the IRS on the BS -> primary-tx segment.
// Positions closer than the path-loss reference distance to a radiating
// endpoint are redrawn. channels is left empty.
ScenarioRealization sample_positions(const ScenarioDims& dims,
                                     const GeometryConfig& cfg,
                                     std::uint64_t seed);

// Fill in channels: entry = sqrt(link gain) * CN(0,1), one independent
// substream per link so that realizations with different m or n_t share the
// links they have in common.
ChannelSet generate_channels(ScenarioRealization& realization, std::uint64_t seed);

// One-call convenience: positions + channels.
ScenarioRealization generate_scenario(const ScenarioDims& dims,
                                      const GeometryConfig& cfg,
                                      std::uint64_t seed);

// Drop the IRS from a realization's channels (m = 0 view with identical
// direct links). Used by the no-IRS baseline.
ChannelSet strip_irs(const ChannelSet& ch);

// Portable text replay format; complex entries stored as re/im pairs.
void save_realization(const ScenarioRealization& r, std::ostream& os);
ScenarioRealization load_realization(std::istream& is);

}  // namespace irscr
