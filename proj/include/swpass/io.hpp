#pragma once

#include "swpass/cstr.hpp"
#include "swpass/hitting.hpp"
#include "swpass/linalg.hpp"
#include "swpass/linear_cert.hpp"
#include "swpass/measure.hpp"
#include "swpass/passivity.hpp"
#include "swpass/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace swpass {

/// Shortest "%.17g" rendering used by every CSV writer.
[[nodiscard]] std::string format_double(double v);

/// Header t,x1,...,xn,u1,...,um; one row per recorded step.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Header episode,tau_even,tau_odd; a missing final odd time is left empty.
void write_episodes_csv(std::ostream& os, const EpisodeTimes& episodes);

/// Header i1..in,lo1..lon,hi1..hin,mass; one row per bin.
void write_measure_csv(std::ostream& os, const HistogramMeasure& measure);

/// Row-major numeric CSV; blank lines and lines starting with '#' are skipped.
/// Throws ValidationError on ragged rows or unparsable cells.
[[nodiscard]] Mat read_matrix_csv(const std::filesystem::path& path);
[[nodiscard]] Mat parse_matrix_csv(const std::string& text, const std::string& source = "csv");

/// Creates parent directories; throws ValidationError on I/O failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

[[nodiscard]] nlohmann::json vec_to_json(const Vec& v);
[[nodiscard]] nlohmann::json mat_to_json(const Mat& m);
[[nodiscard]] nlohmann::json to_json(const PassivityReport& report);
[[nodiscard]] nlohmann::json to_json(const RecurrenceEstimate& est);
[[nodiscard]] nlohmann::json to_json(const EpisodeStatistics& stats);
[[nodiscard]] nlohmann::json to_json(const Lemma3Bounds& bounds);
[[nodiscard]] nlohmann::json to_json(const LinearCertificate& cert);
[[nodiscard]] nlohmann::json to_json(const ConvergenceTable& table);
[[nodiscard]] nlohmann::json to_json(const CstrRadius& radius);
[[nodiscard]] nlohmann::json to_json(const BandEstimate& band);
[[nodiscard]] nlohmann::json to_json(const InvariantBound& bound);

}  // namespace swpass
