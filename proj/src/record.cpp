#include "microdrift/record.hpp"

#include "microdrift/errors.hpp"
#include "microdrift/svg.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace microdrift {

namespace fs = std::filesystem;

std::string config_hash(const Json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunRecord::run_id() const {
  std::string stamp;
  for (char c : created_utc)
    if (c != '-' && c != ':') stamp += c;
  return stamp + "-" + config_hash(config);
}

Json RunRecord::to_json() const {
  Json j;
  j["artifact"] = kArtifactName;
  j["version"] = kArtifactVersion;
  j["command"] = command;
  j["config"] = config;
  j["config_hash"] = config_hash(config);
  j["reports"] = reports;
  j["timestamp"] = {{"utc", created_utc}, {"run_id", run_id()}, {"timings", timings}};
  return j;
}

RunRecord RunRecord::from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("artifact") || doc.at("artifact") != kArtifactName)
    throw ValidationError("not a run record (missing artifact tag)");
  RunRecord r;
  r.command = doc.value("command", "");
  r.config = doc.value("config", Json::object());
  r.reports = doc.value("reports", Json::object());
  if (doc.contains("timestamp") && doc.at("timestamp").is_object()) {
    r.created_utc = doc.at("timestamp").value("utc", "");
    r.timings = doc.at("timestamp").value("timings", Json::object());
  }
  return r;
}

namespace {

fs::path staging_name(const fs::path& target) {
  return target.parent_path() / ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
}

void write_plain(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  ensure_dir(path.parent_path());
  const fs::path tmp = staging_name(path);
  try {
    write_plain(tmp, content);
  } catch (...) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

std::vector<fs::path> persist_run(const RunRecord& record, const fs::path& dir, const std::vector<OutputFile>& extra) {
  ensure_dir(dir);
  std::vector<OutputFile> files = extra;
  files.push_back({"run.json", record.to_json().dump(2) + "\n"});
  std::vector<fs::path> staged, targets;
  auto cleanup = [&] {
    for (const auto& p : staged) {
      std::error_code ignore;
      fs::remove(p, ignore);
    }
  };
  try {
    for (const auto& f : files) {
      const fs::path target = dir / f.name;
      const fs::path tmp = staging_name(target);
      staged.push_back(tmp);
      write_plain(tmp, f.content);
      targets.push_back(target);
    }
  } catch (...) {
    cleanup();
    throw;
  }
  for (const auto& t : targets) {
    std::error_code ec;
    if (fs::is_directory(t, ec)) {
      cleanup();
      throw IoError("cannot write '" + t.string() + "': a directory is in the way");
    }
  }
  // files created by this call are removed again if a later rename fails
  std::vector<fs::path> created;
  for (std::size_t i = 0; i < staged.size(); ++i) {
    std::error_code ec;
    const bool existed = fs::exists(targets[i], ec);
    fs::rename(staged[i], targets[i], ec);
    if (ec) {
      cleanup();
      for (const auto& c : created) {
        std::error_code ignore;
        fs::remove(c, ignore);
      }
      throw IoError("cannot move '" + staged[i].string() + "' into place: " + ec.message());
    }
    if (!existed) created.push_back(targets[i]);
  }
  return targets;
}

namespace {

std::vector<double> column(const Json& rows, std::size_t idx) {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.at(idx).get<double>());
  return out;
}

std::string sweep_svg(const Json& sweep) {
  std::vector<double> eps, drift;
  for (const auto& r : sweep.at("rows")) {
    eps.push_back(r.at("epsilon").get<double>());
    drift.push_back(r.at("drift_total").get<double>());
  }
  const double slope = sweep.at("total_fit").at("slope").get<double>();
  const double intercept = sweep.at("total_fit").at("intercept").get<double>();
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  const std::vector<double> ends{*lo, *hi};
  std::vector<double> fit, guide;
  double log_x = 0.0, log_y = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (eps[i] > 0 && drift[i] > 0) {
      log_x += std::log(eps[i]);
      log_y += std::log(drift[i]);
      ++used;
    }
  if (used) {
    log_x /= static_cast<double>(used);
    log_y /= static_cast<double>(used);
  }
  for (double e : ends) {
    fit.push_back(std::exp(intercept) * std::pow(e, slope));
    guide.push_back(std::exp(log_y + 0.5 * (std::log(e) - log_x)));
  }
  char label[64];
  std::snprintf(label, sizeof label, "least-squares fit, slope %.3f", slope);
  SvgPlot plot("Action drift at tau versus eps", "eps", "|I(tau) - I(0)|", true, true);
  plot.add({"measured drift", eps, drift, "#1f77b4", false, true, false});
  plot.add({label, ends, fit, "#d62728", true, false, false});
  plot.add({"slope 1/2 guide", ends, guide, "#7f7f7f", true, false, true});
  return plot.render();
}

std::string psi_svg(const Json& psi) {
  const auto q = column(psi.at("rows"), 0);
  const auto v = column(psi.at("rows"), 2);
  std::vector<double> sx, sy;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sx.push_back(q[i]);
    sy.push_back(v[i]);
    sx.push_back(q[i] + 1.0);
    sy.push_back(v[i]);
  }
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const bool log_y = !v.empty() && *mn > 0 && *mx / *mn > 50.0;
  SvgPlot plot("Small-divisor function Psi(Q)", "Q", "Psi(Q)", false, log_y);
  plot.add({"Psi", sx, sy, "#2ca02c", true, false, false});
  return plot.render();
}

std::string decomposition_svg(const Json& series) {
  const Json& rows = series.at("rows");
  const auto t = column(rows, 0);
  SvgPlot plot("Drift decomposition in adapted coordinates", "t", "|drift component|");
  plot.add({"along Lambda", t, column(rows, 1), "#1f77b4", true, false, false});
  plot.add({"transverse", t, column(rows, 2), "#d62728", true, false, false});
  plot.add({"total", t, column(rows, 3), "#7f7f7f", true, false, true});
  return plot.render();
}

}  // namespace

PlotOutcome emit_plots(const Json& record, const fs::path& dir) {
  PlotOutcome out;
  const Json reports = record.is_object() && record.contains("reports") ? record.at("reports") : Json::object();
  auto emit = [&](const char* name, const std::string& svg) {
    const fs::path p = dir / name;
    write_file_atomic(p, svg);
    out.files.push_back(p);
  };
  if (reports.contains("sweep") && reports.at("sweep").contains("rows") && !reports.at("sweep").at("rows").empty())
    emit("drift_vs_eps.svg", sweep_svg(reports.at("sweep")));
  else
    out.notices.push_back("no sweep report: drift_vs_eps.svg skipped");
  if (reports.contains("psi") && !reports.at("psi").at("rows").empty())
    emit("psi_staircase.svg", psi_svg(reports.at("psi")));
  else
    out.notices.push_back("no psi table: psi_staircase.svg skipped");
  if (reports.contains("drift") && reports.at("drift").contains("series"))
    emit("drift_decomposition.svg", decomposition_svg(reports.at("drift").at("series")));
  else
    out.notices.push_back("no drift time series: drift_decomposition.svg skipped");
  return out;
}

}  // namespace microdrift
