#include "cubehodge/pipeline/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "cubehodge/errors.hpp"

namespace cubehodge::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ParameterError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ParameterError(key + ": expected a number, got '" + v + "'");
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

template <class E, std::size_t N>
E parse_enum(const std::string& key, const std::string& v, const std::pair<const char*, E> (&names)[N]) {
  for (const auto& [name, value] : names)
    if (v == name) return value;
  std::string allowed;
  for (const auto& [name, value] : names) allowed += std::string(allowed.empty() ? "" : "|") + name;
  throw ParameterError(key + ": expected " + allowed + ", got '" + v + "'");
}

template <class E, std::size_t N>
std::string enum_name(E e, const std::pair<const char*, E> (&names)[N]) {
  for (const auto& [name, value] : names)
    if (value == e) return name;
  return "?";
}

constexpr std::pair<const char*, FieldMethod> kMethods[] = {{"gradient", FieldMethod::gradient},
                                                            {"flow", FieldMethod::flow},
                                                            {"channel-pair", FieldMethod::channel_pair},
                                                            {"patch", FieldMethod::patch}};
constexpr std::pair<const char*, FlowDirection> kDirections[] = {{"descend", FlowDirection::descend},
                                                                 {"ascend", FlowDirection::ascend}};
constexpr std::pair<const char*, LaplacianVariant> kVariants[] = {{"big", LaplacianVariant::big},
                                                                  {"hodge", LaplacianVariant::hodge}};
constexpr std::pair<const char*, BoundaryCondition> kConditions[] = {{"tangential", BoundaryCondition::tangential},
                                                                     {"normal", BoundaryCondition::normal}};
constexpr std::pair<const char*, bool> kBools[] = {{"false", false}, {"true", true}};

} // namespace

void apply_setting(PipelineConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "input") c.input = v;
  else if (key == "output") c.output = v;
  else if (key == "split") c.split = v;
  else if (key == "threshold") c.threshold = v == "auto" ? std::nullopt : std::optional<double>(parse_double(key, v));
  else if (key == "method") c.method = parse_enum(key, v, kMethods);
  else if (key == "forward_step") c.forward_step = parse_int(key, v);
  else if (key == "backward_step") c.backward_step = parse_int(key, v);
  else if (key == "direction") c.direction = parse_enum(key, v, kDirections);
  else if (key == "patch_edge") c.patch_edge = parse_int(key, v);
  else if (key == "variant") c.variant = parse_enum(key, v, kVariants);
  else if (key == "tolerance") c.tolerance = parse_double(key, v);
  else if (key == "max_iterations_factor") c.max_iterations_factor = parse_int(key, v);
  else if (key == "workers") c.workers = parse_int(key, v);
  else if (key == "degree") c.degree = parse_int(key, v);
  else if (key == "condition") c.condition = parse_enum(key, v, kConditions);
  else if (key == "count") c.count = parse_int(key, v);
  else if (key == "raster_dir") c.raster_dir = v;
  else if (key == "hsv") c.hsv = parse_enum(key, v, kBools);
  else throw ParameterError("unknown configuration key '" + key + "'");
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(number) + ": expected key = value");
    apply_setting(base, trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return base;
}

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string serialize_config(const PipelineConfig& c) {
  std::ostringstream out;
  out << "input = " << c.input << '\n'
      << "output = " << c.output << '\n'
      << "split = " << c.split << '\n'
      << "threshold = " << (c.threshold ? format_double(*c.threshold) : "auto") << '\n'
      << "method = " << enum_name(c.method, kMethods) << '\n'
      << "forward_step = " << c.forward_step << '\n'
      << "backward_step = " << c.backward_step << '\n'
      << "direction = " << enum_name(c.direction, kDirections) << '\n'
      << "patch_edge = " << c.patch_edge << '\n'
      << "variant = " << enum_name(c.variant, kVariants) << '\n'
      << "tolerance = " << format_double(c.tolerance) << '\n'
      << "max_iterations_factor = " << c.max_iterations_factor << '\n'
      << "workers = " << c.workers << '\n'
      << "degree = " << c.degree << '\n'
      << "condition = " << enum_name(c.condition, kConditions) << '\n'
      << "count = " << c.count << '\n'
      << "raster_dir = " << c.raster_dir << '\n'
      << "hsv = " << enum_name(c.hsv, kBools) << '\n';
  return out.str();
}

std::string config_hash(const PipelineConfig& config) {
  const std::string text = serialize_config(config);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

void validate(const PipelineConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
  };
  require(!c.threshold || std::isfinite(*c.threshold), "threshold must be finite");
  require(c.forward_step >= 1 && c.forward_step <= 64, "forward_step must be in [1, 64]");
  require(c.backward_step >= 1 && c.backward_step <= 64, "backward_step must be in [1, 64]");
  require(c.patch_edge >= 2, "patch_edge must be at least 2");
  require(c.tolerance > 0.0 && c.tolerance < 1.0, "tolerance must be in (0, 1)");
  require(c.max_iterations_factor >= 1, "max_iterations_factor must be at least 1");
  require(c.workers >= 1 && c.workers <= 1024, "workers must be in [1, 1024]");
  require(c.degree >= 0 && c.degree <= 3, "degree must be in [0, 3]");
  require(c.count >= 1, "count must be at least 1");
  for (const std::string* s : {&c.input, &c.output, &c.split, &c.raster_dir})
    require(s->find('\n') == std::string::npos, "paths must not contain newlines");
}

void apply_environment(PipelineConfig& config) {
  if (const char* env = std::getenv("CUBEHODGE_WORKERS"); env != nullptr && *env != '\0')
    apply_setting(config, "workers", env);
}

PipelineConfig resolve(PipelineConfig config, DType dtype) {
  if (!config.threshold) config.threshold = default_threshold(dtype);
  return config;
}

ImageDecompositionConfig decomposition_config(const PipelineConfig& c) {
  ImageDecompositionConfig out;
  out.threshold = c.threshold.value_or(1.0);
  out.method = c.method;
  out.params = {c.forward_step, c.backward_step, c.direction, c.patch_edge};
  out.variant = c.variant;
  out.solver.tolerance = c.tolerance;
  out.solver.max_iterations_factor = c.max_iterations_factor;
  return out;
}

} // namespace cubehodge::pipeline
