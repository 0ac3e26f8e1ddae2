#include "inspect/serialize.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "inspect/errors.hpp"

namespace inspect {

namespace fs = std::filesystem;

namespace {

constexpr char kCheckpointMagic[8] = {'I', 'N', 'S', 'P', 'C', 'K', 'P', 'T'};

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw FormatError(std::string(what) + ": unknown key \"" + k + "\"");
  }
}

template <class T>
T get_field(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw FormatError(std::string(what) + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": bad value for \"" + key + "\": " + e.what());
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out, const char* what) {
  if (j.contains(key)) out = get_field<T>(j, key, what);
}

const char* scope_name(StatsScope s) { return s == StatsScope::Global ? "global" : "per_class"; }
StatsScope parse_scope(const std::string& s) {
  if (s == "global") return StatsScope::Global;
  if (s == "per_class") return StatsScope::PerClass;
  throw FormatError("stats_scope must be \"global\" or \"per_class\", got \"" + s + "\"");
}
const char* objective_name(Objective o) { return o == Objective::Inspect ? "inspect" : "ddpm"; }
Objective parse_objective(const std::string& s) {
  if (s == "inspect") return Objective::Inspect;
  if (s == "ddpm") return Objective::Ddpm;
  throw FormatError("objective must be \"inspect\" or \"ddpm\", got \"" + s + "\"");
}
const char* layout_name(DirLayout l) { return l == DirLayout::Flat ? "flat" : "per_class"; }
DirLayout parse_layout(const std::string& s) {
  if (s == "flat") return DirLayout::Flat;
  if (s == "per_class") return DirLayout::PerClassSubdirs;
  throw FormatError("layout must be \"flat\" or \"per_class\", got \"" + s + "\"");
}

json denoiser_to_json(const ConvDenoiserConfig& c) {
  return {{"shape", {c.shape.channels, c.shape.height, c.shape.width}},
          {"hidden", c.hidden},
          {"stages", c.stages},
          {"nonlinear", c.nonlinear},
          {"input_skip", c.input_skip}};
}

ConvDenoiserConfig denoiser_from_json(const json& j) {
  reject_unknown(j, {"shape", "hidden", "stages", "nonlinear", "input_skip"}, "denoiser");
  ConvDenoiserConfig c;
  if (j.contains("shape")) {
    const auto s = get_field<std::vector<int>>(j, "shape", "denoiser");
    if (s.size() != 3) throw FormatError("denoiser: shape must be [C, N1, N2]");
    c.shape = Shape{s[0], s[1], s[2]};
  }
  read_opt(j, "hidden", c.hidden, "denoiser");
  read_opt(j, "stages", c.stages, "denoiser");
  read_opt(j, "nonlinear", c.nonlinear, "denoiser");
  read_opt(j, "input_skip", c.input_skip, "denoiser");
  return c;
}

}  // namespace

void save_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json schedule_to_json(const NoiseSchedule& schedule) {
  const auto a = schedule.alphas();
  const auto ab = schedule.alpha_bars();
  return {{"T", schedule.steps()},
          {"alpha", std::vector<double>(a.begin(), a.end())},
          {"alpha_bar", std::vector<double>(ab.begin(), ab.end())}};
}

NoiseSchedule schedule_from_json(const json& j) {
  reject_unknown(j, {"T", "alpha", "alpha_bar"}, "schedule");
  NoiseSchedule s(get_field<std::vector<double>>(j, "alpha", "schedule"));
  if (j.contains("T") && get_field<int>(j, "T", "schedule") != s.steps()) {
    throw FormatError("schedule: T disagrees with the alpha array");
  }
  if (j.contains("alpha_bar")) {
    const auto ab = get_field<std::vector<double>>(j, "alpha_bar", "schedule");
    if (ab.size() != s.alpha_bars().size()) throw FormatError("schedule: alpha_bar length");
    for (std::size_t i = 0; i < ab.size(); ++i) {
      if (std::abs(ab[i] - s.alpha_bars()[i]) > 1e-12) {
        throw FormatError("schedule: alpha_bar disagrees with the alpha products");
      }
    }
  }
  return s;
}

json stats_to_json(const ClassStats& stats) {
  return {{"label", stats.label ? json(*stats.label) : json(nullptr)},
          {"shape", {stats.shape.channels, stats.shape.height, stats.shape.width}},
          {"mu", stats.mean},
          {"var", stats.var},
          {"n", stats.count},
          {"padding", stats.padding}};
}

ClassStats stats_from_json(const json& j) {
  reject_unknown(j, {"label", "shape", "mu", "var", "n", "padding"}, "stats");
  ClassStats s;
  if (j.contains("label") && !j.at("label").is_null()) {
    s.label = j.at("label").is_string() ? j.at("label").get<std::string>()
                                        : j.at("label").dump();
  }
  const auto shape = get_field<std::vector<int>>(j, "shape", "stats");
  if (shape.size() != 3) throw FormatError("stats: shape must be [C, N1, N2]");
  s.shape = Shape{shape[0], shape[1], shape[2]};
  s.mean = get_field<std::vector<double>>(j, "mu", "stats");
  s.var = get_field<std::vector<double>>(j, "var", "stats");
  read_opt(j, "n", s.count, "stats");
  read_opt(j, "padding", s.padding, "stats");
  try {
    s.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("stats: ") + e.what());
  }
  return s;
}

void save_stats(const fs::path& path, const std::vector<ClassStats>& stats) {
  if (stats.empty()) throw DomainError("save_stats: nothing to save");
  if (stats.size() == 1) {
    save_json(path, stats_to_json(stats.front()));
    return;
  }
  json arr = json::array();
  for (const auto& s : stats) arr.push_back(stats_to_json(s));
  save_json(path, arr);
}

std::vector<ClassStats> load_stats(const fs::path& path) {
  const json j = load_json(path);
  std::vector<ClassStats> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(stats_from_json(e));
  } else {
    out.push_back(stats_from_json(j));
  }
  if (out.empty()) throw FormatError(path.string() + ": empty stats array");
  return out;
}

const ClassStats& find_stats(const std::vector<ClassStats>& all,
                             const std::optional<std::string>& label) {
  for (const auto& s : all) {
    if (s.label == label) return s;
  }
  if (!label && all.size() == 1) return all.front();
  throw DomainError("no statistics for label " + (label ? *label : std::string("<global>")));
}

json report_to_json(const OracleReport& report) {
  // Keys may repeat (one entry per checkpoint); keep them as an ordered list.
  json list = json::array();
  for (const auto& [k, v] : report.params) list.push_back({k, v});
  json j = {{"check", report.check},
            {"pass", report.pass},
            {"discrepancy", report.discrepancy},
            {"tolerance", report.tolerance},
            {"n", report.samples},
            {"params", list}};
  if (!report.note.empty()) j["note"] = report.note;
  // JSON has no infinity; a failed structural check reports null.
  if (!std::isfinite(report.discrepancy)) j["discrepancy"] = nullptr;
  return j;
}

void save_checkpoint(const fs::path& path, const CheckpointHeader& header,
                     const ConvDenoiser& denoiser) {
  if (!(header.denoiser == denoiser.config())) {
    throw DomainError("save_checkpoint: header config differs from the denoiser");
  }
  const auto params = denoiser.parameters();
  const json h = {{"format", 1},
                  {"denoiser", denoiser_to_json(header.denoiser)},
                  {"iteration", header.iteration},
                  {"T", header.steps},
                  {"terminal_eps", header.terminal_eps},
                  {"objective", objective_name(header.objective)},
                  {"parameters", params.size()},
                  {"history", header.history}};
  const std::string text = h.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kCheckpointMagic, 8);
  std::uint64_t len = text.size();
  unsigned char lb[8];
  for (int i = 0; i < 8; ++i) lb[i] = static_cast<unsigned char>(len >> (8 * i));
  out.write(reinterpret_cast<const char*>(lb), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : params) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw BadMagicError(path.string() + ": not a checkpoint (bad magic)");
  }
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= std::uint64_t{bytes[8 + i]} << (8 * i);
  if (bytes.size() < 16 + len) {
    throw TruncatedError(path.string() + ": truncated header: expected " +
                         std::to_string(16 + len) + " bytes, got " + std::to_string(bytes.size()));
  }
  json h;
  try {
    h = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  reject_unknown(h, {"format", "denoiser", "iteration", "T", "terminal_eps", "objective",
                     "parameters", "history"},
                 "checkpoint");
  CheckpointHeader header;
  header.denoiser = denoiser_from_json(get_field<json>(h, "denoiser", "checkpoint"));
  header.iteration = get_field<int>(h, "iteration", "checkpoint");
  header.steps = get_field<int>(h, "T", "checkpoint");
  header.terminal_eps = get_field<double>(h, "terminal_eps", "checkpoint");
  header.objective = parse_objective(get_field<std::string>(h, "objective", "checkpoint"));
  read_opt(h, "history", header.history, "checkpoint");
  const auto count = get_field<std::size_t>(h, "parameters", "checkpoint");

  ConvDenoiser net(header.denoiser);
  if (net.parameters().size() != count) {
    throw CountMismatchError(path.string() + ": parameter count " + std::to_string(count) +
                             " does not match the architecture (" +
                             std::to_string(net.parameters().size()) + ")");
  }
  const std::size_t expected = 16 + len + 8 * count;
  if (bytes.size() != expected) {
    throw TruncatedError(path.string() + ": truncated payload: expected " +
                         std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
  }
  const std::uint8_t* p = bytes.data() + 16 + len;
  for (std::size_t i = 0; i < count; ++i, p += 8) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{p[b]} << (8 * b);
    double v;
    std::memcpy(&v, &bits, 8);
    if (!std::isfinite(v)) throw NonFiniteError(path.string() + ": non-finite parameter");
    net.parameters()[i] = v;
  }
  return {std::move(header), std::move(net)};
}

json run_config_to_json(const RunConfig& c) {
  json data = {{"images", c.images},
               {"labels", c.labels},
               {"image_dir", c.image_dir},
               {"layout", layout_name(c.layout)},
               {"pad_to", c.pad_to},
               {"label", c.label ? json(*c.label) : json(nullptr)},
               {"limit", c.limit}};
  json train = {{"iterations", c.train.iterations},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"variance_floor", c.train.variance_floor},
                {"objective", objective_name(c.train.objective)},
                {"checkpoint_every", c.checkpoint_every},
                {"threads", c.train.threads}};
  json sample = {{"stats", c.stats_file},
                {"checkpoint", c.checkpoint},
                {"label", c.sample_label ? json(*c.sample_label) : json(nullptr)},
                {"steps", c.sample_steps},
                {"trajectory", c.trajectory},
                {"sampler", objective_name(c.sampler)}};
  return {{"schedule", c.schedule},
          {"T", c.steps},
          {"terminal_eps", c.terminal_eps},
          {"stats_scope", scope_name(c.scope)},
          {"data", data},
          {"train", train},
          {"denoiser", denoiser_to_json(c.denoiser)},
          {"sample", sample},
          {"sample_count", c.sample_count},
          {"seed", c.seed ? json(*c.seed) : json(nullptr)},
          {"output_dir", c.output_dir}};
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown(j, {"schedule", "T", "terminal_eps", "stats_scope", "data", "train",
                     "denoiser", "sample", "sample_count", "seed", "output_dir"},
                 "config");
  RunConfig c;
  read_opt(j, "schedule", c.schedule, "config");
  if (c.schedule != "cosine") throw FormatError("config: only the \"cosine\" schedule exists");
  read_opt(j, "T", c.steps, "config");
  read_opt(j, "terminal_eps", c.terminal_eps, "config");
  if (j.contains("stats_scope")) c.scope = parse_scope(get_field<std::string>(j, "stats_scope", "config"));
  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown(d, {"images", "labels", "image_dir", "layout", "pad_to", "label", "limit"},
                   "config.data");
    read_opt(d, "images", c.images, "config.data");
    read_opt(d, "labels", c.labels, "config.data");
    read_opt(d, "image_dir", c.image_dir, "config.data");
    if (d.contains("layout")) c.layout = parse_layout(get_field<std::string>(d, "layout", "config.data"));
    read_opt(d, "pad_to", c.pad_to, "config.data");
    if (d.contains("label") && !d.at("label").is_null()) c.label = get_field<int>(d, "label", "config.data");
    read_opt(d, "limit", c.limit, "config.data");
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"iterations", "batch_size", "learning_rate", "variance_floor",
                       "objective", "checkpoint_every", "threads"},
                   "config.train");
    read_opt(t, "iterations", c.train.iterations, "config.train");
    read_opt(t, "batch_size", c.train.batch_size, "config.train");
    read_opt(t, "learning_rate", c.train.learning_rate, "config.train");
    read_opt(t, "variance_floor", c.train.variance_floor, "config.train");
    if (t.contains("objective")) {
      c.train.objective = parse_objective(get_field<std::string>(t, "objective", "config.train"));
    }
    read_opt(t, "checkpoint_every", c.checkpoint_every, "config.train");
    read_opt(t, "threads", c.train.threads, "config.train");
  }
  if (j.contains("denoiser")) c.denoiser = denoiser_from_json(j.at("denoiser"));
  if (j.contains("sample")) {
    const json& sm = j.at("sample");
    reject_unknown(sm, {"stats", "checkpoint", "label", "steps", "trajectory", "sampler"},
                   "config.sample");
    read_opt(sm, "stats", c.stats_file, "config.sample");
    read_opt(sm, "checkpoint", c.checkpoint, "config.sample");
    if (sm.contains("label") && !sm.at("label").is_null()) {
      c.sample_label = get_field<std::string>(sm, "label", "config.sample");
    }
    read_opt(sm, "steps", c.sample_steps, "config.sample");
    read_opt(sm, "trajectory", c.trajectory, "config.sample");
    if (sm.contains("sampler")) {
      c.sampler = parse_objective(get_field<std::string>(sm, "sampler", "config.sample"));
    }
  }
  read_opt(j, "sample_count", c.sample_count, "config");
  if (j.contains("seed") && !j.at("seed").is_null()) {
    c.seed = get_field<std::uint64_t>(j, "seed", "config");
    c.train.seed = *c.seed;
  }
  read_opt(j, "output_dir", c.output_dir, "config");
  c.train.scope = c.scope;
  if (c.steps < 1) throw FormatError("config: T must be >= 1");
  if (c.train.iterations < 0 || c.train.batch_size < 1) {
    throw FormatError("config.train: iterations must be >= 0 and batch_size >= 1");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  RunConfig c = run_config_from_json(load_json(path));
  const fs::path base = fs::absolute(path).parent_path();
  const auto resolve = [&](std::string& p, bool must_exist) {
    if (p.empty()) return;
    fs::path q(p);
    if (q.is_relative()) q = base / q;
    q = q.lexically_normal();
    if (must_exist && !fs::exists(q)) throw IoError("config path does not exist: " + q.string());
    p = q.string();
  };
  resolve(c.images, true);
  resolve(c.labels, true);
  resolve(c.image_dir, true);
  resolve(c.stats_file, true);
  resolve(c.checkpoint, true);
  resolve(c.output_dir, false);
  return c;
}

NoiseSchedule make_schedule(const RunConfig& config) {
  return cosine_schedule(config.steps, config.terminal_eps);
}

namespace {

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

void write_invariance_csv(const fs::path& path, const std::vector<ClassStats>& stats,
                          const std::vector<InvarianceReport>& reports) {
  if (stats.size() != reports.size()) throw DomainError("write_invariance_csv: size mismatch");
  auto out = open_csv(path);
  out << "label,threshold,exact_zero,near_zero,total\n";
  for (std::size_t i = 0; i < stats.size(); ++i) {
    out << (stats[i].label ? *stats[i].label : "all") << ',' << reports[i].threshold << ','
        << reports[i].exact_zero << ',' << reports[i].near_zero << ',' << reports[i].total
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_radial_csv(const fs::path& path, const std::vector<std::string>& labels,
                      const std::vector<RadialProfile>& profiles) {
  if (labels.size() != profiles.size()) throw DomainError("write_radial_csv: size mismatch");
  auto out = open_csv(path);
  out << "label,bin,radius,mean_power,count\n";
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (std::size_t b = 0; b < profiles[i].size(); ++b) {
      const auto& bin = profiles[i][b];
      out << labels[i] << ',' << b << ',' << bin.radius << ',' << bin.mean_power << ','
          << bin.count << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_loss_csv(const fs::path& path, const std::vector<double>& history,
                    int first_iteration) {
  auto out = open_csv(path);
  out << "iteration,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out << first_iteration + static_cast<int>(i) << ',' << history[i] << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_loss_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "iteration,loss") {
    throw FormatError(path.string() + ": expected header iteration,loss");
  }
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError(path.string() + ": malformed row");
    out.push_back(std::stod(line.substr(comma + 1)));
  }
  return out;
}

}  // namespace inspect
