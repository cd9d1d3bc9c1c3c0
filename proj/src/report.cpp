#include "dann/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "dann/errors.hpp"

namespace dann {

namespace {

std::string real(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

// Columns network..basis, shared by records.csv and selection.csv. Fields a
// kind does not use are left blank: q and basis for DNN.
std::string spec_columns(const NetworkSpec& s) {
  const bool dnn = s.kind == NetworkKind::DNN;
  return fmt::format("{},{},{},{},{},{}", to_string(s.kind), s.L, s.p, dnn ? "" : std::to_string(s.q),
                     to_string(s.sigma), dnn ? "" : std::string(to_string(s.basis)));
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  return out;
}

template <typename T>
T parse_number(std::string_view cell, std::size_t line, std::string_view column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw DataError(fmt::format("records.csv line {}, column {}: bad value '{}'", line, column, cell));
  return value;
}

double parse_real(std::string_view cell, std::size_t line, std::string_view column) {
  if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  return parse_number<double>(cell, line, column);
}

}  // namespace

void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  {
    auto out = open_for_write(dir / "records.csv");
    out << kRecordsHeader << '\n';
    for (const auto& r : bundle.records)
      out << fmt::format("{},{},{},{},{},{},{}\n", spec_columns(r.spec), real(r.validation_error),
                         real(r.test_error), real(r.training_time_sec), r.n_params, r.seed,
                         r.sample_id);
    if (!out) throw DataError("write failed for records.csv");
  }
  {
    auto out = open_for_write(dir / "selection.csv");
    out << kSelectionHeader << '\n';
    for (const auto& sel : bundle.selections) {
      auto emit = [&](std::string_view which, const std::optional<RunRecord>& pick) {
        if (!pick) {
          out << fmt::format("{},{},{},NA,NA,NA,NA,NA,NA,NA,NA,NA\n", sel.sample_id,
                             to_string(sel.kind), which);
          return;
        }
        const auto& s = pick->spec;
        const bool dnn = s.kind == NetworkKind::DNN;
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", sel.sample_id, to_string(s.kind),
                           which, s.L, s.p, dnn ? "" : std::to_string(s.q), to_string(s.sigma),
                           dnn ? "" : std::string(to_string(s.basis)), real(pick->validation_error),
                           real(pick->test_error), real(pick->training_time_sec), pick->n_params);
      };
      emit("best", sel.best);
      if (sel.kind != NetworkKind::DNN) emit("small", sel.small);
    }
    if (!out) throw DataError("write failed for selection.csv");
  }
  {
    auto out = open_for_write(dir / "summary.csv");
    out << kSummaryHeader << '\n';
    for (const auto& s : bundle.summary)
      out << fmt::format("{},{},{},{},{}\n", to_string(s.kind), s.selection,
                         s.avg_test_error ? real(*s.avg_test_error) : "NA",
                         s.avg_n_params ? real(*s.avg_n_params) : "NA", s.samples);
    if (!out) throw DataError("write failed for summary.csv");
  }
  {
    auto out = open_for_write(dir / "plotdata.csv");
    out << kPlotHeader << '\n';
    for (const auto& r : bundle.records) {
      if (r.failed()) continue;
      const bool dnn = r.spec.kind == NetworkKind::DNN;
      out << fmt::format("{},{},{},{}\n", to_string(r.spec.kind),
                         dnn ? "" : std::string(to_string(r.spec.basis)),
                         real(std::log10(static_cast<double>(r.n_params))),
                         real(r.validation_error));
    }
    if (!out) throw DataError("write failed for plotdata.csv");
  }
}

std::vector<RunRecord> parse_records_csv(const std::filesystem::path& path, int d) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader)
    throw DataError(fmt::format("{}: unexpected header", path.string()));

  std::vector<RunRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 12)
      throw DataError(fmt::format("{}: line {} has {} fields, expected 12", path.string(), line_no, f.size()));

    RunRecord r;
    try {
      r.spec.kind = parse_network_kind(f[0]);
      r.spec.d = d;
      r.spec.L = parse_number<int>(f[1], line_no, "L");
      r.spec.p = parse_number<int>(f[2], line_no, "p");
      r.spec.q = f[3].empty() ? 0 : parse_number<int>(f[3], line_no, "q");
      r.spec.sigma = parse_activation(f[4]);
      r.spec.basis = f[5].empty() ? BasisFamily::Polynomial : parse_basis(f[5]);
    } catch (const ConfigError& e) {
      throw DataError(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
    }
    r.validation_error = parse_real(f[6], line_no, "validation_error");
    r.test_error = parse_real(f[7], line_no, "test_error");
    r.training_time_sec = parse_real(f[8], line_no, "training_time_sec");
    r.n_params = parse_number<std::uint64_t>(f[9], line_no, "n_params");
    r.seed = parse_number<std::uint64_t>(f[10], line_no, "seed");
    r.sample_id = parse_number<int>(f[11], line_no, "sample_id");
    records.push_back(r);
  }
  return records;
}

}  // namespace dann
