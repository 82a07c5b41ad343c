#include "swpass/io.hpp"

#include "swpass/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace swpass {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index n = traj.states.rows();
  const Eigen::Index m = traj.inputs.rows();
  os << 't';
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << (i + 1);
  for (Eigen::Index j = 0; j < m; ++j) os << ",u" << (j + 1);
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    os << format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(traj.states(i, c));
    for (Eigen::Index j = 0; j < m; ++j) os << ',' << format_double(traj.inputs(j, c));
    os << '\n';
  }
}

void write_episodes_csv(std::ostream& os, const EpisodeTimes& episodes) {
  os << "episode,tau_even,tau_odd\n";
  for (std::size_t e = 0; 2 * e < episodes.taus.size(); ++e) {
    os << e << ',' << format_double(episodes.taus[2 * e]) << ',';
    if (2 * e + 1 < episodes.taus.size()) os << format_double(episodes.taus[2 * e + 1]);
    os << '\n';
  }
}

void write_measure_csv(std::ostream& os, const HistogramMeasure& measure) {
  const std::size_t n = measure.dim();
  for (std::size_t d = 0; d < n; ++d) os << (d ? "," : "") << 'i' << (d + 1);
  for (std::size_t d = 0; d < n; ++d) os << ",lo" << (d + 1);
  for (std::size_t d = 0; d < n; ++d) os << ",hi" << (d + 1);
  os << ",mass\n";
  for (std::size_t b = 0; b < measure.total_bins(); ++b) {
    const auto idx = measure.multi_index(b);
    const Vec lo = measure.bin_lo(b);
    const Vec hi = measure.bin_hi(b);
    for (std::size_t d = 0; d < n; ++d) os << (d ? "," : "") << idx[d];
    for (Eigen::Index d = 0; d < lo.size(); ++d) os << ',' << format_double(lo(d));
    for (Eigen::Index d = 0; d < hi.size(); ++d) os << ',' << format_double(hi(d));
    os << ',' << format_double(measure.mass()[b]) << '\n';
  }
}

Mat parse_matrix_csv(const std::string& text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ValidationError(source + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw ValidationError(source + ":" + std::to_string(line_no) + ": trailing characters in '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw ValidationError(source + ": empty matrix");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Mat read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read matrix file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_matrix_csv(ss.str(), path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  if (!out) throw ValidationError("write failed for " + path.string());
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

json to_json(const PassivityReport& r) {
  return {
      {"condition", r.condition},
      {"delta", r.delta},
      {"shell",
       {{"center", vec_to_json(r.shell.center)},
        {"inner_radius", r.shell.inner_radius},
        {"outer_radius", r.shell.outer_radius},
        {"epsilon", r.shell.epsilon},
        {"samples", r.shell.samples},
        {"seed", r.shell.seed}}},
      {"worst_margin", r.worst_margin},
      {"worst_point", vec_to_json(r.worst_point)},
      {"k_estimate", r.k_estimate},
      {"C_estimate", r.C_estimate},
      {"C_box", {{"lo", vec_to_json(r.C_box.lo)}, {"hi", vec_to_json(r.C_box.hi)}}},
      {"C_samples", r.C_samples},
      {"min_rank_eigenvalue", r.min_rank_eigenvalue},
      {"rank_threshold", r.rank_threshold},
      {"center_is_sampled_minimum", r.center_is_sampled_minimum},
      {"verdict",
       {{"passivity", r.passivity_pass}, {"drift_rate", r.drift_rate_pass}, {"rank", r.rank_pass}}},
  };
}

json to_json(const RecurrenceEstimate& e) {
  return {{"mean", e.mean},       {"ci95", e.ci95},         {"bound", e.bound},
          {"hits", e.hits},       {"censored", e.censored}, {"violated", e.violated}};
}

json to_json(const EpisodeStatistics& s) {
  auto one = [](const DurationStats& d) {
    return json{{"mean", d.mean}, {"std_error", d.std_error}, {"count", d.count}};
  };
  return {{"excursion", one(s.excursion)}, {"descent", one(s.descent)}};
}

json to_json(const Lemma3Bounds& b) {
  return {{"excursion_lower", b.excursion_lower},
          {"descent_upper", b.descent_upper},
          {"occupation_upper", b.occupation_upper}};
}

json to_json(const LinearCertificate& c) {
  return {{"pass", c.pass}, {"coupling_residual", c.coupling_residual}, {"lyap_max_eig", c.lyap_max_eig}};
}

json to_json(const ConvergenceTable& t) {
  json cross = json::array();
  for (const auto& p : t.cross_initial) cross.push_back({{"a", p.a}, {"b", p.b}, {"l1", p.l1}});
  return {{"times", t.times}, {"successive_l1", t.successive}, {"cross_initial_l1", cross}};
}

json to_json(const CstrRadius& r) { return {{"delta", r.delta}, {"R", r.R}, {"epsilon_max", r.epsilon_max}}; }

json to_json(const BandEstimate& b) {
  return {{"center", b.center}, {"half_width", b.half_width}, {"std_error", b.std_error}, {"samples", b.samples}};
}

json to_json(const InvariantBound& b) {
  return {{"shell_radius", b.shell_radius},
          {"set_radius", b.set_radius},
          {"k", b.k},
          {"C", b.C},
          {"V_B", b.V_B},
          {"V0", b.V0},
          {"bound", b.bound},
          {"empirical", b.empirical},
          {"holds", b.holds}};
}

}  // namespace swpass
