#include "logoco/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "logoco/core/manifest.hpp"
#include "logoco/core/random.hpp"
#include "logoco/detector/state.hpp"

namespace logoco::cli {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool bare_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-' || c == '.';
}

// Minimal cursor-based parser for one TOML value.
class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  json parse_all() {
    auto v = value();
    skip_space();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected text after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  json value() {
    skip_space();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    return scalar();
  }

  json basic_string() {
    std::string out;
    for (++pos_; pos_ < s_.size(); ++pos_) {
      const char c = s_[pos_];
      if (c == '"') {
        ++pos_;
        return out;
      }
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (++pos_ >= s_.size()) break;
      switch (s_[pos_]) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        default: fail(std::string("unsupported escape \\") + s_[pos_]);
      }
    }
    fail("unterminated string");
  }

  json literal_string() {
    const auto end = s_.find('\'', pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  json array() {
    json out = json::array();
    ++pos_;
    for (;;) {
      skip_space();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      out.push_back(value());
      skip_space();
      if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
      else if (pos_ >= s_.size() || s_[pos_] != ']') fail("expected ',' or ']' in array");
    }
  }

  json scalar() {
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' &&
           s_[pos_] != '\t' && s_[pos_] != '#') {
      ++pos_;
    }
    std::string token;
    for (char c : s_.substr(start, pos_ - start)) {
      if (c != '_') token.push_back(c);
    }
    if (token == "true") return true;
    if (token == "false") return false;
    if (token.empty()) fail("missing value");
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (token.find_first_of(".eE") == std::string::npos || token == "inf" || token == "nan") {
      if (token[0] != '-') {
        std::uint64_t u = 0;
        const auto* p = token[0] == '+' ? first + 1 : first;
        auto [ptr, ec] = std::from_chars(p, last, u);
        if (ec == std::errc() && ptr == last) return u;
      } else {
        std::int64_t i = 0;
        auto [ptr, ec] = std::from_chars(first, last, i);
        if (ec == std::errc() && ptr == last) return i;
      }
    }
    double d = 0.0;
    const auto* p = token[0] == '+' ? first + 1 : first;
    auto [ptr, ec] = std::from_chars(p, last, d);
    if (ec == std::errc() && ptr == last) return d;
    fail("cannot parse value '" + token + "'");
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

void flatten_into(const json& node, const std::string& prefix, json& out) {
  for (const auto& [k, v] : node.items()) {
    const auto key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) flatten_into(v, key, out);
    else out[key] = v;
  }
}

const std::vector<std::string>& slot_keys() {
  static const std::vector<std::string> keys{
      "name", "backend", "endpoint", "timeout_ms", "retries", "seed", "competence",
      "false_fire", "score_spread", "difficulty_spread", "localization_jitter",
      "false_score_skew", "gain.synthetic_gain", "gain.synthetic_ceiling", "gain.real_gain",
      "gain.informativeness_floor", "gain.noise_penalty", "gain.drift"};
  return keys;
}

// Typed access to the flat document, collecting problems instead of throwing.
class Reader {
 public:
  Reader(const json& flat, std::filesystem::path base) : flat_(flat), base_(std::move(base)) {}

  template <typename T>
  void get(const std::string& key, T& dst) {
    const auto it = find(key);
    if (!it) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected true or false");
        dst = it->template get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument("expected a string");
        dst = it->template get<std::string>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
        dst = it->template get<T>();
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!it->is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
        dst = it->template get<T>();
      } else {
        if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
        dst = it->template get<T>();
      }
    } catch (const std::exception& e) {
      problem(key + ": " + e.what());
    }
  }

  void path(const std::string& key, std::filesystem::path& dst) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    std::filesystem::path p(s);
    dst = p.is_relative() && !base_.empty() ? base_ / p : p;
  }

  void names(const std::string& key, std::vector<std::string>& dst) {
    const auto it = find(key);
    if (!it) return;
    dst.clear();
    if (it->is_string()) {
      std::stringstream in(it->get<std::string>());
      for (std::string n; std::getline(in, n, ',');) {
        const auto t = trim(n);
        if (!t.empty()) dst.emplace_back(t);
      }
    } else if (it->is_array() && std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_string(); })) {
      for (const auto& v : *it) dst.push_back(v.get<std::string>());
    } else {
      problem(key + ": expected a list of names");
    }
  }

  bool has(const std::string& key) const { return flat_.contains(key); }
  void problem(std::string p) { problems_.push_back(std::move(p)); }

  std::vector<std::string> finish(const std::vector<std::string>& known) {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [k, v] : flat_.items()) {
      if (!allowed.count(k)) problems_.push_back("unknown key '" + k + "'");
    }
    return std::move(problems_);
  }

 private:
  const json* find(const std::string& key) const {
    const auto it = flat_.find(key);
    return it == flat_.end() ? nullptr : &*it;
  }

  const json& flat_;
  std::filesystem::path base_;
  std::vector<std::string> problems_;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

json parse_toml(std::string_view text) {
  json out = json::object();
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos) throw ParseError(line_no, "unterminated section header");
      const auto rest = trim(line.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') throw ParseError(line_no, "text after section header");
      section = std::string(trim(line.substr(1, close - 1)));
      if (section.empty() || !std::all_of(section.begin(), section.end(), bare_key_char)) {
        throw ParseError(line_no, "bad section name '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    auto key = std::string(trim(line.substr(0, eq)));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    else if (key.empty() || !std::all_of(key.begin(), key.end(), bare_key_char)) {
      throw ParseError(line_no, "bad key '" + key + "'");
    }
    const auto full = section.empty() ? key : section + "." + key;
    if (out.contains(full)) throw ParseError(line_no, "duplicate key '" + full + "'");
    out[full] = ValueParser(line.substr(eq + 1), line_no).parse_all();
  }
  return out;
}

json flatten(const json& doc) {
  json out = json::object();
  if (!doc.is_object()) throw InvalidArgument("config document must be an object");
  flatten_into(doc, "", out);
  return out;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      return flatten(json::parse(buf.str()));
    } catch (const json::exception& e) {
      throw InvalidArgument("config '" + path.string() + "': " + e.what());
    }
  }
  try {
    return parse_toml(buf.str());
  } catch (const ParseError& e) {
    throw InvalidArgument("config '" + path.string() + "': " + e.what());
  }
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys{
      "seed", "pool", "icons", "backgrounds", "eval", "latent", "out", "classes",
      "mining.threshold", "mining.n_cls", "mining.max_iterations", "mining.stop_epsilon",
      "mining.mode", "mining.bootstrap_per_class", "mining.deployment_slot",
      "mining.max_context_backgrounds", "eval.iou", "eval.strict", "eval.interpolation",
      "synth.min_fraction", "synth.max_fraction", "synth.max_rotation", "synth.min_jitter",
      "synth.max_jitter", "synth.opacity", "synth.render"};
  for (const char* slot : {"slot0.", "slot1."}) {
    for (const auto& k : slot_keys()) keys.push_back(slot + k);
  }
  return keys;
}

RunConfig build_config(const json& flat, const std::filesystem::path& base) {
  RunConfig c;
  c.slots[0].name = "frcnn-slot";
  c.slots[1].name = "yolo-slot";
  Reader r(flat, base);
  r.get("seed", c.seed);
  r.path("pool", c.pool);
  r.path("icons", c.icons);
  r.path("backgrounds", c.backgrounds);
  r.path("eval", c.eval);
  r.path("latent", c.latent);
  r.path("out", c.out);
  r.names("classes", c.classes);

  auto& m = c.mining;
  r.get("mining.threshold", m.threshold);
  r.get("mining.n_cls", m.n_cls);
  r.get("mining.max_iterations", m.max_iterations);
  r.get("mining.stop_epsilon", m.stop_epsilon);
  std::string mode;
  r.get("mining.mode", mode);
  if (!mode.empty()) {
    if (auto parsed = parse_learning_mode(mode)) m.mode = *parsed;
    else r.problem("mining.mode: expected 'co' or 'self', got '" + mode + "'");
  }
  r.get("mining.bootstrap_per_class", m.bootstrap_per_class);
  r.get("mining.deployment_slot", m.deployment_slot);
  r.get("mining.max_context_backgrounds", m.max_context_backgrounds);
  m.eval_set = c.eval;

  r.get("eval.iou", m.eval.match.iou_threshold);
  r.get("eval.strict", m.eval.match.strict);
  std::string interp;
  r.get("eval.interpolation", interp);
  if (interp == "11pt") m.eval.interpolation = eval::Interpolation::eleven_point;
  else if (!interp.empty() && interp != "all") {
    r.problem("eval.interpolation: expected 'all' or '11pt', got '" + interp + "'");
  }

  auto& t = m.synth.ranges;
  r.get("synth.min_fraction", t.min_fraction);
  r.get("synth.max_fraction", t.max_fraction);
  r.get("synth.max_rotation", t.max_rotation_deg);
  r.get("synth.min_jitter", t.min_jitter);
  r.get("synth.max_jitter", t.max_jitter);
  r.get("synth.opacity", t.opacity);
  r.get("synth.render", m.synth.render);
  if (m.synth.render && !c.out.empty()) m.synth.output_dir = c.out / "synthetic";

  for (std::size_t i = 0; i < 2; ++i) {
    const auto p = "slot" + std::to_string(i) + ".";
    auto& s = c.slots[i];
    r.get(p + "name", s.name);
    std::string backend;
    r.get(p + "backend", backend);
    if (backend == "external") s.backend = Backend::external;
    else if (!backend.empty() && backend != "simulated") {
      r.problem(p + "backend: expected 'simulated' or 'external', got '" + backend + "'");
    }
    r.get(p + "endpoint", s.endpoint);
    std::int64_t timeout = s.external.timeout.count();
    r.get(p + "timeout_ms", timeout);
    s.external.timeout = std::chrono::milliseconds(timeout);
    r.get(p + "retries", s.external.retries);
    if (r.has(p + "seed")) {
      std::uint64_t seed = 0;
      r.get(p + "seed", seed);
      s.seed = seed;
    }
    r.get(p + "competence", s.initial_competence);
    r.get(p + "false_fire", s.initial_false_fire);
    r.get(p + "score_spread", s.sim.score_spread);
    r.get(p + "difficulty_spread", s.sim.difficulty_spread);
    r.get(p + "localization_jitter", s.sim.localization_jitter);
    r.get(p + "false_score_skew", s.sim.false_score_skew);
    auto& g = s.sim.gain;
    r.get(p + "gain.synthetic_gain", g.synthetic_gain);
    r.get(p + "gain.synthetic_ceiling", g.synthetic_ceiling);
    r.get(p + "gain.real_gain", g.real_gain);
    r.get(p + "gain.informativeness_floor", g.informativeness_floor);
    r.get(p + "gain.noise_penalty", g.noise_penalty);
    r.get(p + "gain.drift", g.drift);
  }

  auto problems = r.finish(known_keys());
  try {
    validate(c.mining);
  } catch (const InvalidArgument& e) {
    std::stringstream in(e.what());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) problems.emplace_back(trim(line));
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& s = c.slots[i];
    const auto p = "slot" + std::to_string(i);
    if (s.name.empty()) problems.push_back(p + ".name must not be empty");
    if (s.backend == Backend::external && s.endpoint.empty()) {
      problems.push_back(p + ".endpoint is required for the external backend");
    }
    if (s.external.timeout.count() <= 0) problems.push_back(p + ".timeout_ms must be > 0");
    if (s.external.retries < 0) problems.push_back(p + ".retries must be >= 0");
    if (s.backend == Backend::simulated) {
      auto params = s.sim;
      params.competence = {s.initial_competence};
      params.false_fire = {s.initial_false_fire};
      try {
        validate(params, 1);
      } catch (const InvalidArgument& e) {
        problems.push_back(p + ": " + e.what());
      }
    }
  }
  if (c.slots[0].name == c.slots[1].name) problems.push_back("the two slots need distinct names");
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

void require_paths(const RunConfig& c, const std::vector<std::string>& required) {
  std::vector<std::string> problems;
  for (const auto& key : required) {
    const std::filesystem::path* p = nullptr;
    if (key == "pool") p = &c.pool;
    else if (key == "icons") p = &c.icons;
    else if (key == "backgrounds") p = &c.backgrounds;
    else if (key == "eval") p = &c.eval;
    else if (key == "latent") p = &c.latent;
    else if (key == "out") p = &c.out;
    else throw InvalidArgument("unknown path key '" + key + "'");
    if (p->empty()) problems.push_back(key + " is not set");
    else if (key != "out" && !std::filesystem::exists(*p)) {
      problems.push_back(key + " '" + p->string() + "' does not exist");
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

json to_json(const RunConfig& c) {
  const auto& m = c.mining;
  json slots = json::array();
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& s = c.slots[i];
    json j{{"name", s.name}, {"backend", std::string(to_string(s.backend))}};
    if (s.backend == Backend::external) {
      j["endpoint"] = s.endpoint;
      j["timeout_ms"] = s.external.timeout.count();
      j["retries"] = s.external.retries;
    } else {
      auto params = s.sim;
      params.competence = {s.initial_competence};
      params.false_fire = {s.initial_false_fire};
      params.seed = s.seed.value_or(hash_combine(c.seed, i + 1));
      j["simulated"] = logoco::to_json(params);
    }
    slots.push_back(std::move(j));
  }
  const auto& t = m.synth.ranges;
  return {{"seed", c.seed},
          {"paths",
           {{"pool", c.pool.string()},
            {"icons", c.icons.string()},
            {"backgrounds", c.backgrounds.string()},
            {"eval", c.eval.string()},
            {"latent", c.latent.string()},
            {"out", c.out.string()}}},
          {"classes", c.classes},
          {"mining",
           {{"threshold", m.threshold},
            {"n_cls", m.n_cls},
            {"max_iterations", m.max_iterations},
            {"stop_epsilon", m.stop_epsilon},
            {"mode", std::string(to_string(m.mode))},
            {"bootstrap_per_class", m.bootstrap_per_class},
            {"deployment_slot", m.deployment_slot},
            {"max_context_backgrounds", m.max_context_backgrounds}}},
          {"eval",
           {{"iou", m.eval.match.iou_threshold},
            {"strict", m.eval.match.strict},
            {"interpolation", m.eval.interpolation == eval::Interpolation::all_points ? "all" : "11pt"}}},
          {"synth",
           {{"min_fraction", t.min_fraction},
            {"max_fraction", t.max_fraction},
            {"max_rotation", t.max_rotation_deg},
            {"min_jitter", t.min_jitter},
            {"max_jitter", t.max_jitter},
            {"opacity", t.opacity},
            {"render", m.synth.render}}},
          {"slots", std::move(slots)}};
}

std::unique_ptr<Detector> make_detector(const RunConfig& c, std::size_t index,
                                        const std::vector<std::string>& class_names,
                                        std::shared_ptr<const LatentTruth> latent) {
  const auto& s = c.slots.at(index);
  if (s.backend == Backend::external) {
    auto options = s.external;
    if (!c.out.empty()) options.work_dir = c.out / "wire";
    return std::make_unique<ExternalDetector>(s.name, class_names,
                                              make_transport_factory(s.endpoint), options);
  }
  auto params = s.sim;
  params.competence.assign(class_names.size(), s.initial_competence);
  params.false_fire.assign(class_names.size(), s.initial_false_fire);
  params.seed = s.seed.value_or(hash_combine(c.seed, index + 1));
  return std::make_unique<SimulatedDetector>(s.name, class_names, params, std::move(latent));
}

std::string to_toml(const RunConfig& c) {
  std::ostringstream out;
  const auto path = [&](const char* key, const std::filesystem::path& p) {
    if (!p.empty()) out << key << " = " << quote(p.generic_string()) << "\n";
  };
  out << "seed = " << c.seed << "\n";
  path("pool", c.pool);
  path("icons", c.icons);
  path("backgrounds", c.backgrounds);
  path("eval", c.eval);
  path("latent", c.latent);
  path("out", c.out);
  if (!c.classes.empty()) {
    out << "classes = [";
    for (std::size_t i = 0; i < c.classes.size(); ++i) out << (i ? ", " : "") << quote(c.classes[i]);
    out << "]\n";
  }
  const auto& m = c.mining;
  out << "\n[mining]\n"
      << "threshold = " << format_double(m.threshold) << "\n"
      << "n_cls = " << m.n_cls << "\n"
      << "max_iterations = " << m.max_iterations << "\n"
      << "stop_epsilon = " << format_double(m.stop_epsilon) << "\n"
      << "mode = " << quote(std::string(to_string(m.mode))) << "\n"
      << "bootstrap_per_class = " << m.bootstrap_per_class << "\n"
      << "deployment_slot = " << m.deployment_slot << "\n"
      << "max_context_backgrounds = " << m.max_context_backgrounds << "\n";
  out << "\n[eval]\n"
      << "iou = " << format_double(m.eval.match.iou_threshold) << "\n"
      << "strict = " << (m.eval.match.strict ? "true" : "false") << "\n"
      << "interpolation = "
      << quote(m.eval.interpolation == eval::Interpolation::all_points ? "all" : "11pt") << "\n";
  const auto& t = m.synth.ranges;
  out << "\n[synth]\n"
      << "min_fraction = " << format_double(t.min_fraction) << "\n"
      << "max_fraction = " << format_double(t.max_fraction) << "\n"
      << "max_rotation = " << format_double(t.max_rotation_deg) << "\n"
      << "min_jitter = " << format_double(t.min_jitter) << "\n"
      << "max_jitter = " << format_double(t.max_jitter) << "\n"
      << "opacity = " << format_double(t.opacity) << "\n"
      << "render = " << (m.synth.render ? "true" : "false") << "\n";
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& s = c.slots[i];
    out << "\n[slot" << i << "]\n"
        << "name = " << quote(s.name) << "\n"
        << "backend = " << quote(std::string(to_string(s.backend))) << "\n";
    if (s.seed) out << "seed = " << *s.seed << "\n";
    if (s.backend == Backend::external) {
      out << "endpoint = " << quote(s.endpoint) << "\n"
          << "timeout_ms = " << s.external.timeout.count() << "\n"
          << "retries = " << s.external.retries << "\n";
      continue;
    }
    const auto& g = s.sim.gain;
    out << "competence = " << format_double(s.initial_competence) << "\n"
        << "false_fire = " << format_double(s.initial_false_fire) << "\n"
        << "score_spread = " << format_double(s.sim.score_spread) << "\n"
        << "difficulty_spread = " << format_double(s.sim.difficulty_spread) << "\n"
        << "localization_jitter = " << format_double(s.sim.localization_jitter) << "\n"
        << "false_score_skew = " << format_double(s.sim.false_score_skew) << "\n"
        << "gain.synthetic_gain = " << format_double(g.synthetic_gain) << "\n"
        << "gain.synthetic_ceiling = " << format_double(g.synthetic_ceiling) << "\n"
        << "gain.real_gain = " << format_double(g.real_gain) << "\n"
        << "gain.informativeness_floor = " << format_double(g.informativeness_floor) << "\n"
        << "gain.noise_penalty = " << format_double(g.noise_penalty) << "\n"
        << "gain.drift = " << format_double(g.drift) << "\n";
  }
  return out.str();
}

}  // namespace logoco::cli
