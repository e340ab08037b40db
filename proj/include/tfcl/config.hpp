#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tfcl/streams.hpp"
#include "tfcl/trainer.hpp"

namespace tfcl {

// Line-oriented `key = value` files. '#' starts a comment, blank lines
// are skipped, later assignments win. Reads are tracked so a finished
// parse can reject misspelled keys.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  // Throws listing every key never read; catches typos.
  void require_all_consumed() const;

 private:
  std::string raw(const std::string& key) const;

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> touched_;
};

// Hyperparameter bundles; named defaults applied before file/flag keys.
// "classification" and "sphere" drive the softmax profile, "embedding"
// the triplet one.
void apply_profile(RunConfig& cfg, const std::string& profile);

StreamSpec stream_spec_from_kv(const KeyValueConfig& kv);

// Overlays every recognized key onto cfg (including the stream spec).
void overlay_run_config(RunConfig& cfg, const KeyValueConfig& kv);

// defaults -> profile -> file keys, with full consumption check.
RunConfig run_config_from_file(const std::string& path);

}  // namespace tfcl
