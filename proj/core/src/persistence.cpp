// Copyright 2026 The fedrank Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "fedrank/persistence.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <system_error>

#include "fedrank/errors.hpp"
#include "json.hpp"

namespace fedrank {
namespace {

using nlohmann::json;

json weights_json(const Weights& w) {
  json arr = json::array();
  for (double x : w) arr.push_back(x);
  return arr;
}

Weights weights_from_json(const json& j) {
  if (!j.is_array() || j.size() != kNumWeights) throw IoError("expected an array of 8 numbers");
  Weights w{};
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    w[i] = j[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[i].get<double>();
  }
  return w;
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double from_nullable(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

template <typename T>
T parse_integer(std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("malformed integer '" + std::string(text) + "'");
  }
  return value;
}

json parse_json_line(std::string_view line, const char* what) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed ") + what + " record: " + e.what());
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

// Keeps only records of rounds before `iteration`, so a resumed run continues
// the logs exactly where the snapshot left off.
void truncate_log(const std::filesystem::path& path, std::int64_t iteration) {
  if (!std::filesystem::exists(path)) return;
  std::string kept;
  for (const std::string& line : read_lines(path)) {
    const json j = parse_json_line(line, "log");
    if (j.at("iteration").get<std::int64_t>() < iteration) kept += line + "\n";
  }
  write_file(path, kept);
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("malformed number '" + std::string(text) + "'");
  }
  return value;
}

std::string format_snapshot(const ServerState& s) {
  std::ostringstream out;
  out << "format " << kSnapshotFormat << "\n";
  out << "iteration " << s.iteration << "\n";
  out << "seed " << s.seed << "\n";
  // Client sampling draws from a stream keyed by (seed, round), so the next
  // round index is the complete generator position.
  out << "rng.stream sampling\n";
  out << "rng.position " << s.iteration << "\n";
  out << "stall_count " << s.stall_count << "\n";
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    out << "weight." << kWeightNames[i] << " " << format_double(s.params[i]) << "\n";
  }
  const RpropHyper& h = s.rprop.hyper;
  out << "rprop.eta0 " << format_double(h.eta0) << "\n";
  out << "rprop.alpha " << format_double(h.alpha) << "\n";
  out << "rprop.beta " << format_double(h.beta) << "\n";
  out << "rprop.eta_min " << format_double(h.eta_min) << "\n";
  out << "rprop.eta_max " << format_double(h.eta_max) << "\n";
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    out << "rprop.step." << kWeightNames[i] << " " << format_double(s.rprop.step_sizes[i]) << "\n";
  }
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    out << "rprop.prev_sign." << kWeightNames[i] << " " << static_cast<int>(s.rprop.prev_signs[i])
        << "\n";
  }
  return out.str();
}

ServerState parse_snapshot(std::string_view text) {
  std::map<std::string, std::string, std::less<>> fields;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line.front() == '#') continue;
    const auto space = line.find(' ');
    if (space == std::string::npos) throw IoError("snapshot line without value: " + line);
    auto [it, fresh] = fields.emplace(line.substr(0, space), line.substr(space + 1));
    if (!fresh) throw IoError("duplicate snapshot key " + it->first);
  }
  auto take = [&](const std::string& key) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw IoError("snapshot is missing " + key);
    std::string value = it->second;
    fields.erase(it);
    return value;
  };

  if (take("format") != kSnapshotFormat) throw IoError("unsupported snapshot format");
  ServerState s;
  s.iteration = parse_integer<std::int64_t>(take("iteration"));
  s.seed = parse_integer<std::uint64_t>(take("seed"));
  if (take("rng.stream") != "sampling") throw IoError("unknown rng stream in snapshot");
  if (parse_integer<std::int64_t>(take("rng.position")) != s.iteration) {
    throw IoError("snapshot rng position does not match its iteration");
  }
  s.stall_count = parse_integer<std::int64_t>(take("stall_count"));
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    s.params[i] = parse_double(take("weight." + std::string(kWeightNames[i])));
  }
  RpropHyper& h = s.rprop.hyper;
  h.eta0 = parse_double(take("rprop.eta0"));
  h.alpha = parse_double(take("rprop.alpha"));
  h.beta = parse_double(take("rprop.beta"));
  h.eta_min = parse_double(take("rprop.eta_min"));
  h.eta_max = parse_double(take("rprop.eta_max"));
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    s.rprop.step_sizes[i] = parse_double(take("rprop.step." + std::string(kWeightNames[i])));
  }
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    const int sign = parse_integer<int>(take("rprop.prev_sign." + std::string(kWeightNames[i])));
    if (sign < -1 || sign > 1) throw IoError("snapshot sign out of range");
    s.rprop.prev_signs[i] = static_cast<std::int8_t>(sign);
  }
  if (!fields.empty()) throw IoError("unknown snapshot key " + fields.begin()->first);
  return s;
}

void write_snapshot(const std::filesystem::path& path, const ServerState& state) {
  write_file(path, format_snapshot(state));
}

ServerState read_snapshot(const std::filesystem::path& path) {
  return parse_snapshot(read_file(path));
}

std::string format_update(const ClientUpdate& u) {
  json j;
  j["client_id"] = u.client_id;
  j["iteration"] = u.iteration;
  j["gradient"] = weights_json(u.gradient);
  j["n_examples"] = u.n_examples;
  j["metrics"] = {{"mean_loss", nullable(u.metrics.mean_loss)},
                  {"chars_typed", u.metrics.chars_typed},
                  {"selected_ranks", u.metrics.selected_ranks}};
  return j.dump();
}

ClientUpdate parse_update(std::string_view line) {
  const json j = parse_json_line(line, "update");
  try {
    ClientUpdate u;
    u.client_id = j.at("client_id").get<ClientId>();
    u.iteration = j.at("iteration").get<std::int64_t>();
    u.gradient = weights_from_json(j.at("gradient"));
    u.n_examples = j.at("n_examples").get<std::uint32_t>();
    const json& m = j.at("metrics");
    u.metrics.mean_loss = from_nullable(m.at("mean_loss"));
    u.metrics.chars_typed = m.at("chars_typed").get<std::vector<std::uint32_t>>();
    u.metrics.selected_ranks = m.at("selected_ranks").get<std::vector<std::uint32_t>>();
    return u;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed update record: ") + e.what());
  }
}

std::vector<ClientUpdate> read_update_log(const std::filesystem::path& path) {
  std::vector<ClientUpdate> log;
  for (const std::string& line : read_lines(path)) log.push_back(parse_update(line));
  return log;
}

std::string format_history(const ClientHistory& h) {
  json pages = json::array();
  for (const Page& p : h.pages) {
    json visits = json::array();
    for (const Visit& v : p.visits) visits.push_back({v.age_days, to_string(v.type)});
    pages.push_back({{"id", p.id},
                     {"url", p.url},
                     {"total_visit_count", p.total_visit_count},
                     {"bookmarked", p.bookmarked},
                     {"visits", std::move(visits)}});
  }
  json j;
  j["client_id"] = h.client_id;
  j["stream_seed"] = h.stream_seed;
  j["pages"] = std::move(pages);
  return j.dump();
}

ClientHistory parse_history(std::string_view line) {
  const json j = parse_json_line(line, "history");
  try {
    ClientHistory h;
    h.client_id = j.at("client_id").get<ClientId>();
    h.stream_seed = j.at("stream_seed").get<std::uint64_t>();
    for (const json& pj : j.at("pages")) {
      Page p;
      p.id = pj.at("id").get<std::uint32_t>();
      p.url = pj.at("url").get<std::string>();
      p.total_visit_count = pj.at("total_visit_count").get<std::uint32_t>();
      p.bookmarked = pj.at("bookmarked").get<bool>();
      for (const json& vj : pj.at("visits")) {
        p.visits.push_back({vj.at(0).get<double>(), visit_type_from_string(vj.at(1).get<std::string>())});
      }
      validate(p);
      h.pages.push_back(std::move(p));
    }
    return h;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed history record: ") + e.what());
  } catch (const InputError& e) {
    throw IoError(std::string("invalid history record: ") + e.what());
  }
}

void write_histories(const std::filesystem::path& path, std::span<const ClientHistory> pool) {
  std::string out;
  for (const ClientHistory& h : pool) out += format_history(h) + "\n";
  write_file(path, out);
}

std::vector<ClientHistory> read_histories(const std::filesystem::path& path) {
  std::vector<ClientHistory> pool;
  for (const std::string& line : read_lines(path)) pool.push_back(parse_history(line));
  return pool;
}

std::string format_iteration(const IterationRecord& r) {
  json j;
  j["iteration"] = r.iteration;
  j["snapshot_id"] = r.snapshot_id;
  j["num_selected"] = r.num_selected;
  j["num_updates"] = r.num_updates;
  j["closed_early"] = r.closed_early;
  j["stepped"] = r.stepped;
  j["aggregated_update"] = weights_json(r.aggregated_update);
  j["mean_loss"] = nullable(r.mean_loss);
  j["median_loss"] = nullable(r.median_loss);
  j["raw_delta"] = weights_json(r.raw_delta);
  j["applied_delta"] = weights_json(r.applied_delta);
  j["step_sizes"] = weights_json(r.step_sizes);
  return j.dump();
}

std::string format_loss_csv(std::span<const IterationRecord> iterations) {
  std::vector<double> losses;
  losses.reserve(iterations.size());
  for (const IterationRecord& r : iterations) losses.push_back(r.mean_loss);
  const std::vector<double> rolling = rolling_average(losses, 5);
  std::string out = "iteration,mean_loss,median_loss,num_updates,rolling5_loss\n";
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const IterationRecord& r = iterations[i];
    out += std::to_string(r.iteration) + "," + format_double(r.mean_loss) + "," +
           format_double(r.median_loss) + "," + std::to_string(r.num_updates) + "," +
           format_double(rolling[i]) + "\n";
  }
  return out;
}

std::string format_eval_csv(const EvalReport& report) {
  std::string out = "arm,metric,mean,n,U,p,significant\n";
  for (const ArmMetricRow& r : report.rows) {
    out += r.arm + "," + r.metric + "," + format_double(r.mean) + "," + std::to_string(r.n) + "," +
           format_double(r.u) + "," + format_double(r.p) + "," + (r.significant ? "true" : "false") +
           "\n";
  }
  return out;
}

std::string format_stability_csv(const StabilityReport& report) {
  std::string out = "iteration,mean_l1,std_l1\n";
  for (const StabilityRow& r : report.rows) {
    if (!r.subsampled) continue;
    out += std::to_string(r.iteration) + "," + format_double(r.mean_l1) + "," +
           format_double(r.std_l1) + "\n";
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunWriter::RunWriter(std::filesystem::path out_dir, bool resume)
    : dir_(std::move(out_dir)), resume_(resume) {}

std::filesystem::path RunWriter::snapshot_path(std::int64_t iteration) const {
  return dir_ / "snapshots" / (snapshot_id(iteration) + ".txt");
}

void RunWriter::on_start(const ServerState& state) {
  std::error_code ec;
  std::filesystem::create_directories(dir_ / "snapshots", ec);
  if (ec) throw IoError("cannot create " + (dir_ / "snapshots").string() + ": " + ec.message());
  const auto mode = std::ios::binary | (resume_ ? std::ios::app : std::ios::trunc);
  if (resume_) {
    truncate_log(dir_ / "updates.jsonl", state.iteration);
    truncate_log(dir_ / "iterations.jsonl", state.iteration);
  }
  updates_.open(dir_ / "updates.jsonl", mode);
  iterations_.open(dir_ / "iterations.jsonl", mode);
  if (!updates_ || !iterations_) throw IoError("cannot open run logs in " + dir_.string());
  write_snapshot(snapshot_path(state.iteration), state);
}

void RunWriter::on_iteration(const ServerState& state, const IterationRecord& record,
                             std::span<const ClientUpdate> updates) {
  const std::string where = " at iteration " + std::to_string(record.iteration);
  try {
    for (const ClientUpdate& u : updates) updates_ << format_update(u) << '\n';
    iterations_ << format_iteration(record) << '\n';
    updates_.flush();
    iterations_.flush();
    if (!updates_ || !iterations_) throw IoError("cannot append run logs");
    write_snapshot(snapshot_path(state.iteration), state);
  } catch (const IoError& e) {
    throw IoError(e.what() + where);
  }
}

void RunWriter::on_finish(const RunRecord&) {
  updates_.close();
  iterations_.close();
  // Rebuilt from the full log so resumed runs get the whole curve.
  std::vector<IterationRecord> all;
  for (const std::string& line : read_lines(dir_ / "iterations.jsonl")) {
    const json j = parse_json_line(line, "iteration");
    IterationRecord r;
    r.iteration = j.at("iteration").get<std::int64_t>();
    r.num_updates = j.at("num_updates").get<std::size_t>();
    r.mean_loss = from_nullable(j.at("mean_loss"));
    r.median_loss = from_nullable(j.at("median_loss"));
    all.push_back(std::move(r));
  }
  write_file(dir_ / "loss.csv", format_loss_csv(all));
}

}  // namespace fedrank
