#include "tfcl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tfcl {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number for " + key + ": '" + v + "'");
  }
  if (pos != v.size())
    throw std::invalid_argument("trailing junk in " + key + ": '" + v + "'");
  return out;
}

long long parse_ll(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer for " + key + ": '" + v + "'");
  }
  if (pos != v.size())
    throw std::invalid_argument("trailing junk in " + key + ": '" + v + "'");
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has no '='");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has an empty key");
    cfg.kv_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

std::string KeyValueConfig::raw(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw std::invalid_argument("missing config key: " + key);
  touched_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_str(const std::string& key) const { return raw(key); }

std::string KeyValueConfig::get_str(const std::string& key,
                                    const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(key, raw(key)) : fallback;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const long long v = parse_ll(key, raw(key));
  return static_cast<int>(v);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = raw(key);
  std::size_t pos = 0;
  std::uint64_t out;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer for " + key + ": '" + v + "'");
  }
  if (pos != v.size())
    throw std::invalid_argument("trailing junk in " + key + ": '" + v + "'");
  return out;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = raw(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("bad boolean for " + key + ": '" + v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::istringstream in(raw(key));
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(key, tok));
  if (out.empty()) throw std::invalid_argument("empty list for " + key);
  return out;
}

std::vector<int> KeyValueConfig::get_ints(const std::string& key) const {
  std::istringstream in(raw(key));
  std::vector<int> out;
  std::string tok;
  while (in >> tok) out.push_back(static_cast<int>(parse_ll(key, tok)));
  if (out.empty()) throw std::invalid_argument("empty list for " + key);
  return out;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void KeyValueConfig::require_all_consumed() const {
  std::string unknown;
  for (const auto& [k, v] : kv_)
    if (touched_.count(k) == 0) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty())
    throw std::invalid_argument("unrecognized config keys: " + unknown);
}

void apply_profile(RunConfig& cfg, const std::string& profile) {
  if (profile == "classification") {
    cfg.lr = 0.01;
    cfg.lambda = 0.5;
    cfg.buffer_capacity = 40;
    cfg.window = 5;
    cfg.delta_mu = 0.5;
    cfg.delta_sigma = 0.1;
    cfg.inner_steps = 3;
  } else if (profile == "sphere") {
    cfg.lr = 0.01;
    cfg.lambda = 0.5;
    cfg.buffer_capacity = 30;
    cfg.window = 5;
    cfg.delta_mu = 0.5;
    cfg.delta_sigma = 0.1;
    cfg.inner_steps = 3;
  } else if (profile == "embedding") {
    cfg.lr = 1e-4;
    cfg.lambda = 100.0;
    cfg.buffer_capacity = 100;
    cfg.window = 5;
    cfg.delta_mu = 0.3;
    cfg.delta_sigma = 0.1;
    cfg.inner_steps = 10;
    cfg.margin = 0.2;
  } else {
    throw std::invalid_argument("unknown profile: " + profile);
  }
}

namespace {

Transition parse_transition(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  std::string kind;
  in >> kind;
  Transition t;
  if (kind == "sudden") {
    t.kind = TransitionKind::kSudden;
  } else if (kind == "gradual") {
    t.kind = TransitionKind::kGradual;
    if (!(in >> t.blend_batches))
      throw std::invalid_argument(key + ": gradual needs a blend length");
  } else {
    throw std::invalid_argument(key + ": unknown transition '" + kind + "'");
  }
  std::string rest;
  if (in >> rest)
    throw std::invalid_argument(key + ": trailing junk '" + rest + "'");
  return t;
}

std::array<int, 4> parse_orthant(const std::string& key, const std::string& v) {
  if (v.size() != 4)
    throw std::invalid_argument(key + ": orthant needs 4 signs, got '" + v + "'");
  std::array<int, 4> signs{};
  for (int i = 0; i < 4; ++i) {
    if (v[i] == '+') signs[i] = 1;
    else if (v[i] == '-') signs[i] = -1;
    else throw std::invalid_argument(key + ": signs must be '+' or '-'");
  }
  return signs;
}

int segment_count_in(const KeyValueConfig& kv) {
  int max_idx = -1;
  for (const std::string& k : kv.keys_with_prefix("segment.")) {
    const std::size_t dot = k.find('.', 8);
    if (dot == std::string::npos)
      throw std::invalid_argument("malformed segment key: " + k);
    const std::string idx = k.substr(8, dot - 8);
    try {
      max_idx = std::max(max_idx, std::stoi(idx));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed segment key: " + k);
    }
  }
  if (max_idx < 0) throw std::invalid_argument("stream config has no segments");
  return max_idx + 1;
}

}  // namespace

StreamSpec stream_spec_from_kv(const KeyValueConfig& kv) {
  StreamSpec spec;
  spec.kind = parse_stream_kind(kv.get_str("stream"));
  spec.schedule.batch_size = kv.get_int("batch_size", 10);
  spec.sphere_radius = kv.get_double("sphere_radius", 1.3);
  spec.identity.input_dim = kv.get_int("identity_dim", 4);
  spec.identity.cluster_sigma = kv.get_double("identity_sigma", 0.5);
  spec.identity.placement_range = kv.get_double("identity_spread", 3.0);
  spec.identity.templates_per_identity = kv.get_int("identity_templates", 5);

  const int n_segments = segment_count_in(kv);
  for (int s = 0; s < n_segments; ++s) {
    const std::string base = "segment." + std::to_string(s) + ".";
    Segment seg;
    if (!kv.has(base + "duration"))
      throw std::invalid_argument("missing " + base + "duration");
    seg.duration_batches = kv.get_int(base + "duration", 0);
    if (kv.has(base + "transition"))
      seg.transition = parse_transition(base + "transition",
                                        kv.get_str(base + "transition"));

    switch (spec.kind) {
      case StreamKind::kQuadrantSphere: {
        SphereSegment p;
        p.signs = parse_orthant(base + "orthant", kv.get_str(base + "orthant"));
        seg.params = p;
        break;
      }
      case StreamKind::kDriftingGaussian: {
        GaussianSegment p;
        for (int c = 0;; ++c) {
          const std::string cbase = base + "class." + std::to_string(c) + ".";
          if (!kv.has(cbase + "mean")) break;
          GaussianClassSpec cls;
          cls.mean = kv.get_doubles(cbase + "mean");
          cls.cov = kv.get_doubles(cbase + "cov");
          cls.prior = kv.get_double(cbase + "prior", 1.0);
          p.classes.push_back(std::move(cls));
        }
        if (p.classes.empty())
          throw std::invalid_argument(base + "class.0.mean is missing");
        seg.params = p;
        break;
      }
      case StreamKind::kIdentityTrack: {
        IdentitySegment p;
        p.identities = kv.get_ints(base + "identities");
        if (kv.has(base + "priors")) p.priors = kv.get_doubles(base + "priors");
        seg.params = p;
        break;
      }
    }
    spec.schedule.segments.push_back(std::move(seg));
  }
  return spec;
}

void overlay_run_config(RunConfig& cfg, const KeyValueConfig& kv) {
  if (kv.has("variant")) cfg.variant = parse_variant(kv.get_str("variant"));
  cfg.seed = kv.get_u64("seed", cfg.seed);
  if (kv.has("hidden")) cfg.hidden = kv.get_ints("hidden");
  cfg.embed_dim = kv.get_int("embed_dim", cfg.embed_dim);
  cfg.lr = kv.get_double("lr", cfg.lr);
  cfg.lambda = kv.get_double("lambda", cfg.lambda);
  cfg.margin = kv.get_double("margin", cfg.margin);
  cfg.buffer_capacity = kv.get_int("buffer_capacity", cfg.buffer_capacity);
  cfg.buffer_normalize = kv.get_bool("buffer_normalize", cfg.buffer_normalize);
  cfg.window = kv.get_int("window", cfg.window);
  cfg.delta_mu = kv.get_double("delta_mu", cfg.delta_mu);
  cfg.delta_sigma = kv.get_double("delta_sigma", cfg.delta_sigma);
  cfg.inner_steps = kv.get_int("inner_steps", cfg.inner_steps);
  if (kv.has("omega_mode"))
    cfg.omega_mode = parse_omega_mode(kv.get_str("omega_mode"));
  cfg.eval_every = kv.get_int("eval_every", cfg.eval_every);
  cfg.eval_per_segment = kv.get_int("eval_per_segment", cfg.eval_per_segment);
  cfg.epochs = kv.get_int("epochs", cfg.epochs);
  cfg.replay_path = kv.get_str("replay_path", cfg.replay_path);
  cfg.record_path = kv.get_str("record_path", cfg.record_path);
  if (kv.has("stream")) cfg.stream = stream_spec_from_kv(kv);
}

RunConfig run_config_from_file(const std::string& path) {
  const KeyValueConfig kv = KeyValueConfig::parse_file(path);
  RunConfig cfg;
  if (kv.has("profile")) apply_profile(cfg, kv.get_str("profile"));
  overlay_run_config(cfg, kv);
  kv.require_all_consumed();
  return cfg;
}

}  // namespace tfcl
