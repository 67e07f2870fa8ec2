#include "irscr/channel_gen.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "irscr/rng.hpp"

#include <nlohmann/json.hpp>

namespace irscr {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

// fixed stream tags for substream derivation
enum StreamTag : std::uint64_t {
  kTagPositions = 0x706f73ULL,  // "pos"
  kTagF = 0x66ULL,
  kTagGd = 0x6764ULL,
  kTagGr = 0x6772ULL,
  kTagLd = 0x6c64ULL,
  kTagLr = 0x6c72ULL,
};

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

void GeometryConfig::validate() const {
  if (!(cell_radius > 0.0)) throw ConfigError("geometry: cell_radius must be > 0");
  if (!(bs_separation > 0.0)) throw ConfigError("geometry: bs_separation must be > 0");
  if (irs_position < 0.0 || irs_position > 1.0)
    throw ConfigError("geometry: irs_position must be in [0, 1]");
  if (!(carrier_hz > 0.0)) throw ConfigError("geometry: carrier_hz must be > 0");
  if (!(pathloss_exponent > 0.0))
    throw ConfigError("geometry: pathloss_exponent must be > 0");
  if (!(reference_distance > 0.0))
    throw ConfigError("geometry: reference_distance must be > 0");
}

double path_gain(double distance, const GeometryConfig& cfg) {
  if (distance < cfg.reference_distance)
    throw Error("path_gain: distance " + std::to_string(distance) +
                " m below the reference distance");
  const double wavelength = kSpeedOfLight / cfg.carrier_hz;
  const double g_ref = std::pow(wavelength / (4.0 * M_PI), 2.0);
  return g_ref * std::pow(distance, -cfg.pathloss_exponent);
}

ScenarioRealization sample_positions(const ScenarioDims& dims,
                                     const GeometryConfig& cfg,
                                     std::uint64_t seed) {
  dims.validate();
  cfg.validate();
  ScenarioRealization r;
  r.dims = dims;
  r.geometry = cfg;
  r.seed = seed;
  r.bs = {0.0, 0.0};
  r.primary_tx = {cfg.bs_separation, 0.0};
  r.irs = {cfg.irs_position * cfg.bs_separation, 0.0};

  Rng rng(mix_seed(seed, kTagPositions));
  const double min_d = cfg.reference_distance;
  auto draw_in_disk = [&](const Position& center) {
    // uniform in the disk: r = R*sqrt(u)
    for (;;) {
      const double rad = cfg.cell_radius * std::sqrt(rng.uniform());
      const double ang = 2.0 * M_PI * rng.uniform();
      Position p{center.x + rad * std::cos(ang), center.y + rad * std::sin(ang)};
      // keep every link endpoint outside the path-loss reference distance
      if (dist(p, r.bs) >= min_d && dist(p, r.irs) >= min_d &&
          dist(p, r.primary_tx) >= min_d)
        return p;
    }
  };

  r.su.reserve(dims.k_users);
  for (int k = 0; k < dims.k_users; ++k) r.su.push_back(draw_in_disk(r.bs));
  r.pu.reserve(dims.i_users);
  for (int i = 0; i < dims.i_users; ++i) r.pu.push_back(draw_in_disk(r.primary_tx));
  return r;
}

namespace {

CVec draw_cvec(Rng& rng, int n, double gain) {
  const double amp = std::sqrt(gain);
  CVec v(n);
  for (int j = 0; j < n; ++j) v[j] = amp * rng.cgaussian();
  return v;
}

// Gain of the IRS -> user hop under the configured reflected-link model.
double irs_hop_gain(const GeometryConfig& cfg, double d_bs_irs, double d_irs_user) {
  switch (cfg.irs_link_model) {
    case IrsLinkModel::product:
      return path_gain(d_irs_user, cfg);
    case IrsLinkModel::composite:
      // cascade gain comes out as path_gain(d1 + d2) once multiplied with the
      // BS->IRS hop's path_gain(d1)
      return std::pow((d_bs_irs + d_irs_user) / d_bs_irs, -cfg.pathloss_exponent);
  }
  throw ConfigError("unknown IRS link model");
}

}  // namespace

ChannelSet generate_channels(ScenarioRealization& r, std::uint64_t seed) {
  const ScenarioDims& dims = r.dims;
  const GeometryConfig& cfg = r.geometry;
  const double bs_gain = db_to_linear(cfg.bs_gain_dbi);
  const double d_bs_irs = dist(r.bs, r.irs);

  ChannelSet ch;
  ch.f_mat.resize(dims.m, dims.n_t);
  if (dims.m > 0) {
    Rng rng(mix_seed(seed, kTagF));
    const double gain = bs_gain * path_gain(d_bs_irs, cfg);
    const double amp = std::sqrt(gain);
    for (int row = 0; row < dims.m; ++row)
      for (int col = 0; col < dims.n_t; ++col)
        ch.f_mat(row, col) = amp * rng.cgaussian();
  }

  ch.g_d.reserve(dims.k_users);
  ch.g_r.reserve(dims.k_users);
  for (int k = 0; k < dims.k_users; ++k) {
    Rng rng_d(mix_seed(seed, mix_seed(kTagGd, k)));
    ch.g_d.push_back(
        draw_cvec(rng_d, dims.n_t, bs_gain * path_gain(dist(r.bs, r.su[k]), cfg)));
    Rng rng_r(mix_seed(seed, mix_seed(kTagGr, k)));
    ch.g_r.push_back(dims.m > 0
                         ? draw_cvec(rng_r, dims.m,
                                     irs_hop_gain(cfg, d_bs_irs, dist(r.irs, r.su[k])))
                         : CVec(0));
  }

  ch.l_d.reserve(dims.i_users);
  ch.l_r.reserve(dims.i_users);
  for (int i = 0; i < dims.i_users; ++i) {
    Rng rng_d(mix_seed(seed, mix_seed(kTagLd, i)));
    ch.l_d.push_back(
        draw_cvec(rng_d, dims.n_t, bs_gain * path_gain(dist(r.bs, r.pu[i]), cfg)));
    Rng rng_r(mix_seed(seed, mix_seed(kTagLr, i)));
    ch.l_r.push_back(dims.m > 0
                         ? draw_cvec(rng_r, dims.m,
                                     irs_hop_gain(cfg, d_bs_irs, dist(r.irs, r.pu[i])))
                         : CVec(0));
  }

  ch.noise_power = RVec::Constant(dims.k_users, dbm_to_watt(cfg.noise_power_dbm));
  ch.pu_noise_power =
      RVec::Constant(dims.i_users, dbm_to_watt(cfg.pu_noise_power_dbm));
  ch.validate();
  r.channels = ch;
  return ch;
}

ScenarioRealization generate_scenario(const ScenarioDims& dims,
                                      const GeometryConfig& cfg,
                                      std::uint64_t seed) {
  ScenarioRealization r = sample_positions(dims, cfg, seed);
  generate_channels(r, seed);
  return r;
}

ChannelSet strip_irs(const ChannelSet& ch) {
  ChannelSet out = ch;
  out.f_mat.resize(0, ch.dims().n_t);
  for (auto& v : out.g_r) v.resize(0);
  for (auto& v : out.l_r) v.resize(0);
  return out;
}

namespace {

using nlohmann::json;

json cvec_to_json(const CVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back({v[i].real(), v[i].imag()});
  return a;
}

CVec cvec_from_json(const json& a) {
  CVec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = Cplx(a[i][0].get<double>(), a[i][1].get<double>());
  return v;
}

json pos_to_json(const Position& p) { return json{p.x, p.y}; }
Position pos_from_json(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

}  // namespace

void save_realization(const ScenarioRealization& r, std::ostream& os) {
  json j;
  j["dims"] = {{"n_t", r.dims.n_t},
               {"m", r.dims.m},
               {"k_users", r.dims.k_users},
               {"i_users", r.dims.i_users}};
  j["seed"] = r.seed;
  j["bs"] = pos_to_json(r.bs);
  j["primary_tx"] = pos_to_json(r.primary_tx);
  j["irs"] = pos_to_json(r.irs);
  j["su"] = json::array();
  for (const auto& p : r.su) j["su"].push_back(pos_to_json(p));
  j["pu"] = json::array();
  for (const auto& p : r.pu) j["pu"].push_back(pos_to_json(p));

  const ChannelSet& ch = r.channels;
  json f = json::array();
  for (Eigen::Index row = 0; row < ch.f_mat.rows(); ++row)
    f.push_back(cvec_to_json(ch.f_mat.row(row).transpose()));
  j["channels"]["f_mat"] = f;
  auto vec_list = [](const std::vector<CVec>& vecs) {
    json a = json::array();
    for (const auto& v : vecs) a.push_back(cvec_to_json(v));
    return a;
  };
  j["channels"]["g_d"] = vec_list(ch.g_d);
  j["channels"]["g_r"] = vec_list(ch.g_r);
  j["channels"]["l_d"] = vec_list(ch.l_d);
  j["channels"]["l_r"] = vec_list(ch.l_r);
  j["channels"]["noise_power"] = std::vector<double>(
      ch.noise_power.data(), ch.noise_power.data() + ch.noise_power.size());
  j["channels"]["pu_noise_power"] = std::vector<double>(
      ch.pu_noise_power.data(), ch.pu_noise_power.data() + ch.pu_noise_power.size());
  os << j.dump(1) << "\n";
}

ScenarioRealization load_realization(std::istream& is) {
  json j;
  is >> j;
  ScenarioRealization r;
  r.dims.n_t = j["dims"]["n_t"].get<int>();
  r.dims.m = j["dims"]["m"].get<int>();
  r.dims.k_users = j["dims"]["k_users"].get<int>();
  r.dims.i_users = j["dims"]["i_users"].get<int>();
  r.seed = j["seed"].get<std::uint64_t>();
  r.bs = pos_from_json(j["bs"]);
  r.primary_tx = pos_from_json(j["primary_tx"]);
  r.irs = pos_from_json(j["irs"]);
  for (const auto& p : j["su"]) r.su.push_back(pos_from_json(p));
  for (const auto& p : j["pu"]) r.pu.push_back(pos_from_json(p));

  ChannelSet& ch = r.channels;
  const auto& jc = j["channels"];
  ch.f_mat.resize(r.dims.m, r.dims.n_t);
  for (int row = 0; row < r.dims.m; ++row)
    ch.f_mat.row(row) = cvec_from_json(jc["f_mat"][row]).transpose();
  for (const auto& v : jc["g_d"]) ch.g_d.push_back(cvec_from_json(v));
  for (const auto& v : jc["g_r"]) ch.g_r.push_back(cvec_from_json(v));
  for (const auto& v : jc["l_d"]) ch.l_d.push_back(cvec_from_json(v));
  for (const auto& v : jc["l_r"]) ch.l_r.push_back(cvec_from_json(v));
  const auto np = jc["noise_power"].get<std::vector<double>>();
  ch.noise_power = Eigen::Map<const RVec>(np.data(), np.size());
  const auto pnp = jc["pu_noise_power"].get<std::vector<double>>();
  ch.pu_noise_power = Eigen::Map<const RVec>(pnp.data(), pnp.size());
  ch.validate();
  return r;
}

}  // namespace irscr
