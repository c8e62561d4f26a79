#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "ccreid/pipeline.hpp"

namespace ccreid {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw Error(ErrorCode::InvalidConfig, "key '" + key + "': '" + value + "' is not " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (value.empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

// Applies every key=value line through `setters`; rejects unknown keys,
// repeated keys and lines without '='.
void apply_lines(std::istream& in, const std::map<std::string, Setter>& setters) {
  std::string line;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    try {
      it->second(key, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::ifstream open_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config file " + path.string());
  return in;
}

}  // namespace

PipelineConfig parse_pipeline_config(std::istream& in) {
  PipelineConfig c;
  auto integer = [](int& field) { return [&field](const std::string& k, const std::string& v) { field = parse_number<int>(k, v); }; };
  auto real = [](double& field) { return [&field](const std::string& k, const std::string& v) { field = parse_number<double>(k, v); }; };
  auto seed = [](std::uint64_t& field) {
    return [&field](const std::string& k, const std::string& v) { field = parse_number<std::uint64_t>(k, v); };
  };
  auto flag = [](bool& field) { return [&field](const std::string& k, const std::string& v) { field = parse_bool(k, v); }; };

  const std::map<std::string, Setter> setters = {
      {"P", integer(c.clusters_per_batch)},
      {"K", integer(c.instances_per_cluster)},
      {"S", integer(c.synthetic_per_sample)},
      {"momentum", real(c.momentum)},
      {"alpha", real(c.alpha)},
      {"tau", real(c.tau)},
      {"eps", real(c.eps)},
      {"min_samples", integer(c.min_samples)},
      {"max_epochs", integer(c.max_epochs)},
      {"warmup_epochs", integer(c.warmup_epochs)},
      {"base_lr", real(c.base_lr)},
      {"weight_decay", real(c.weight_decay)},
      {"use_augmentation", flag(c.use_augmentation)},
      {"use_self_identity", flag(c.use_self_identity)},
      {"sampling_mode", [&c](const std::string&, const std::string& v) { c.sampling_mode = sampling_mode_from_string(v); }},
      {"self_identity_norm",
       [&c](const std::string& k, const std::string& v) {
         if (v == "mean_over_pairs") c.self_identity_norm = SelfIdentityNormalization::MeanOverPairs;
         else if (v == "per_feature") c.self_identity_norm = SelfIdentityNormalization::PerFeature;
         else bad_value(k, v, "mean_over_pairs or per_feature");
       }},
      {"hidden_widths", [&c](const std::string& k, const std::string& v) { c.hidden_widths = parse_int_list(k, v); }},
      {"feature_dim", integer(c.feature_dim)},
      {"init_seed", seed(c.init_seed)},
      {"sampling_seed", seed(c.sampling_seed)},
      {"checkpoint_every", integer(c.checkpoint_every)},
  };
  apply_lines(in, setters);
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  auto in = open_config(path);
  return parse_pipeline_config(in);
}

std::string to_config_text(const PipelineConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "P=" << c.clusters_per_batch << '\n'
      << "K=" << c.instances_per_cluster << '\n'
      << "S=" << c.synthetic_per_sample << '\n'
      << "momentum=" << c.momentum << '\n'
      << "alpha=" << c.alpha << '\n'
      << "tau=" << c.tau << '\n'
      << "eps=" << c.eps << '\n'
      << "min_samples=" << c.min_samples << '\n'
      << "max_epochs=" << c.max_epochs << '\n'
      << "warmup_epochs=" << c.warmup_epochs << '\n'
      << "base_lr=" << c.base_lr << '\n'
      << "weight_decay=" << c.weight_decay << '\n'
      << "use_augmentation=" << (c.use_augmentation ? "true" : "false") << '\n'
      << "use_self_identity=" << (c.use_self_identity ? "true" : "false") << '\n'
      << "sampling_mode=" << to_string(c.sampling_mode) << '\n'
      << "self_identity_norm="
      << (c.self_identity_norm == SelfIdentityNormalization::MeanOverPairs ? "mean_over_pairs" : "per_feature") << '\n'
      << "hidden_widths=";
  for (std::size_t i = 0; i < c.hidden_widths.size(); ++i) out << (i ? "," : "") << c.hidden_widths[i];
  out << '\n'
      << "feature_dim=" << c.feature_dim << '\n'
      << "init_seed=" << c.init_seed << '\n'
      << "sampling_seed=" << c.sampling_seed << '\n'
      << "checkpoint_every=" << c.checkpoint_every << '\n';
  return out.str();
}

WorldConfig parse_world_config(std::istream& in) {
  WorldConfig c;
  auto integer = [](int& field) { return [&field](const std::string& k, const std::string& v) { field = parse_number<int>(k, v); }; };
  auto real = [](double& field) { return [&field](const std::string& k, const std::string& v) { field = parse_number<double>(k, v); }; };
  const std::map<std::string, Setter> setters = {
      {"num_identities", integer(c.num_identities)},
      {"clothes_per_identity", integer(c.clothes_per_identity)},
      {"samples_per_identity_clothing", integer(c.samples_per_identity_clothing)},
      {"num_cameras", integer(c.num_cameras)},
      {"embedding_dim", integer(c.embedding_dim)},
      {"identity_latent_dim", integer(c.identity_latent_dim)},
      {"clothing_latent_dim", integer(c.clothing_latent_dim)},
      {"identity_scale", real(c.identity_scale)},
      {"clothing_scale", real(c.clothing_scale)},
      {"noise_scale", real(c.noise_scale)},
      {"seed", [&c](const std::string& k, const std::string& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"num_train_identities", integer(c.num_train_identities)},
      {"layout",
       [&c](const std::string& k, const std::string& v) {
         if (v == "by_clothing") c.layout = TestLayout::ByClothing;
         else if (v == "by_camera") c.layout = TestLayout::ByCamera;
         else bad_value(k, v, "by_clothing or by_camera");
       }},
      {"num_templates", integer(c.num_templates)},
      {"max_identity_cosine", real(c.max_identity_cosine)},
  };
  apply_lines(in, setters);
  c.validate();
  return c;
}

WorldConfig load_world_config(const std::filesystem::path& path) {
  auto in = open_config(path);
  return parse_world_config(in);
}

EvalProtocol parse_eval_protocol(std::istream& in) {
  EvalProtocol p;
  const std::map<std::string, Setter> setters = {
      {"setting",
       [&p](const std::string& k, const std::string& v) {
         if (v == "clothing_change") p.setting = EvalSetting::ClothingChange;
         else if (v == "same_clothing") p.setting = EvalSetting::SameClothing;
         else bad_value(k, v, "clothing_change or same_clothing");
       }},
      {"shot",
       [&p](const std::string& k, const std::string& v) {
         if (v == "single") p.shot = Shot::Single;
         else if (v == "multi") p.shot = Shot::Multi;
         else bad_value(k, v, "single or multi");
       }},
      {"exclude_same_camera", [&p](const std::string& k, const std::string& v) { p.exclude_same_camera = parse_bool(k, v); }},
      {"ranks", [&p](const std::string& k, const std::string& v) { p.ranks = parse_int_list(k, v); }},
      {"seed", [&p](const std::string& k, const std::string& v) { p.seed = parse_number<std::uint64_t>(k, v); }},
  };
  apply_lines(in, setters);
  p.validate();
  return p;
}

EvalProtocol load_eval_protocol(const std::filesystem::path& path) {
  auto in = open_config(path);
  return parse_eval_protocol(in);
}

}  // namespace ccreid
