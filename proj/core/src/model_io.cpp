#include "dynonet/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dynonet {

namespace {

using json = nlohmann::json;

constexpr const char* kFormat = "dynonet-model";
constexpr int kVersion = 1;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> keys,
                    const std::string& where) {
  const std::set<std::string_view> allowed(keys);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) {
      throw FormatError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw FormatError(where + ": missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(where + ": bad value for '" + key + "': " + e.what());
  }
}

json gblock_json(const MimoGBlock& block) {
  const auto& s = block.spec();
  std::vector<double> b, a;
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    for (std::size_t i = 0; i < s.in_channels; ++i) {
      const auto& g = block.cell(o, i);
      b.insert(b.end(), g.b().begin(), g.b().end());
      a.insert(a.end(), g.a().begin(), g.a().end());
    }
  }
  return {{"kind", "gblock"}, {"in", s.in_channels}, {"out", s.out_channels},
          {"n_b", s.n_b},     {"n_a", s.n_a},        {"n_k", s.n_k},
          {"b", b},           {"a", a}};
}

MimoGBlock gblock_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"kind", "in", "out", "n_b", "n_a", "n_k", "b", "a"}, where);
  GBlockSpec s{get<std::size_t>(j, "in", where), get<std::size_t>(j, "out", where),
               get<std::size_t>(j, "n_b", where), get<std::size_t>(j, "n_a", where),
               get<std::size_t>(j, "n_k", where)};
  const auto b = get<std::vector<double>>(j, "b", where);
  const auto a = get<std::vector<double>>(j, "a", where);
  const std::size_t cells = s.in_channels * s.out_channels;
  const std::size_t nb = s.n_b + 1;  // numerator coefficients per cell
  if (b.size() != cells * nb || a.size() != cells * s.n_a) {
    throw FormatError(where + ": coefficient count does not match the block shape");
  }
  std::vector<TransferFunction> tfs;
  for (std::size_t c = 0; c < cells; ++c) {
    tfs.emplace_back(std::vector<double>(b.begin() + c * nb, b.begin() + (c + 1) * nb),
                     std::vector<double>(a.begin() + c * s.n_a, a.begin() + (c + 1) * s.n_a),
                     s.n_k);
  }
  return MimoGBlock(s, std::move(tfs));
}

json mlp_json(const MlpSpec& s, const std::vector<MlpParams>& groups) {
  json g = json::array();
  for (const auto& p : groups) {
    g.push_back({{"w1", p.w1}, {"b1", p.b1}, {"w2", p.w2}, {"b2", p.b2}});
  }
  return {{"kind", "mlp"},       {"in", s.in_channels}, {"hidden", s.hidden},
          {"out", s.out_channels}, {"groups", s.groups},  {"params", g}};
}

void add_mlp_from_json(DynoNetModel& model, const json& j, const std::string& where) {
  reject_unknown(j, {"kind", "in", "hidden", "out", "groups", "params"}, where);
  MlpSpec s{get<std::size_t>(j, "in", where), get<std::size_t>(j, "hidden", where),
            get<std::size_t>(j, "out", where), get<std::size_t>(j, "groups", where)};
  if (s.groups == 0 || s.in_channels % s.groups != 0 || s.out_channels % s.groups != 0) {
    throw FormatError(where + ": channel counts must be divisible by groups");
  }
  const json& params = j.at("params");
  if (!params.is_array() || params.size() != s.groups) {
    throw FormatError(where + ": expected one parameter set per group");
  }
  std::vector<MlpParams> groups;
  for (std::size_t g = 0; g < s.groups; ++g) {
    const std::string w = where + ".params[" + std::to_string(g) + "]";
    reject_unknown(params[g], {"w1", "b1", "w2", "b2"}, w);
    MlpParams p{s.in_channels / s.groups,
                s.hidden,
                s.out_channels / s.groups,
                get<std::vector<double>>(params[g], "w1", w),
                get<std::vector<double>>(params[g], "b1", w),
                get<std::vector<double>>(params[g], "w2", w),
                get<std::vector<double>>(params[g], "b2", w)};
    try {
      p.validate();
    } catch (const ShapeError& e) {
      throw FormatError(w + ": " + e.what());
    }
    groups.push_back(std::move(p));
  }
  model.add_mlp_bank(s, groups);
}

json tf_json(const TransferFunction& g) {
  return {{"b", g.b()}, {"a", g.a()}, {"n_k", g.n_k()}};
}

TransferFunction tf_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"b", "a", "n_k"}, where);
  try {
    return {get<std::vector<double>>(j, "b", where), get<std::vector<double>>(j, "a", where),
            get<std::size_t>(j, "n_k", where)};
  } catch (const std::invalid_argument& e) {
    throw FormatError(where + ": " + e.what());
  }
}

}  // namespace

std::string model_to_json(const ModelFile& file) {
  json blocks = json::array();
  const auto& layers = file.model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (const auto* mlp = std::get_if<MlpSpec>(&layers[l].spec)) {
      blocks.push_back(mlp_json(*mlp, file.model.mlp_bank(l)));
    } else {
      blocks.push_back(gblock_json(file.model.gblock(l)));
    }
  }
  const auto& n = file.model.normalization();
  json out = {{"format", kFormat},
              {"version", kVersion},
              {"blocks", blocks},
              {"normalization",
               {{"enabled", n.enabled},
                {"u_mean", n.u_mean},
                {"u_std", n.u_std},
                {"y_mean", n.y_mean},
                {"y_std", n.y_std}}}};
  if (file.noise_check) out["noise_model"] = tf_json(*file.noise_check);
  if (file.quantizer) out["quantizer"] = {{"thresholds", file.quantizer->thresholds()}};
  if (file.log_sigma_e) out["log_sigma_e"] = *file.log_sigma_e;
  return out.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
  const std::string where = "model JSON";
  if (!root.is_object()) throw FormatError(where + ": top level must be an object");
  reject_unknown(root,
                 {"format", "version", "blocks", "normalization", "noise_model",
                  "quantizer", "log_sigma_e"},
                 where);
  if (get<std::string>(root, "format", where) != kFormat) {
    throw FormatError(where + ": not a dynonet model file");
  }
  if (get<int>(root, "version", where) != kVersion) {
    throw FormatError(where + ": unsupported version");
  }
  ModelFile file;
  const json& blocks = root.at("blocks");
  if (!blocks.is_array()) throw FormatError(where + ": 'blocks' must be an array");
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const std::string w = where + ".blocks[" + std::to_string(l) + "]";
    const auto kind = get<std::string>(blocks[l], "kind", w);
    try {
      if (kind == "gblock") {
        file.model.add_gblock(gblock_from_json(blocks[l], w));
      } else if (kind == "mlp") {
        add_mlp_from_json(file.model, blocks[l], w);
      } else {
        throw FormatError(w + ": unknown block kind '" + kind + "'");
      }
    } catch (const ShapeError& e) {
      throw FormatError(w + ": " + e.what());
    }
  }
  if (root.contains("normalization")) {
    const json& j = root.at("normalization");
    const std::string w = where + ".normalization";
    reject_unknown(j, {"enabled", "u_mean", "u_std", "y_mean", "y_std"}, w);
    auto& n = file.model.normalization();
    n.enabled = get<bool>(j, "enabled", w);
    n.u_mean = get<std::vector<double>>(j, "u_mean", w);
    n.u_std = get<std::vector<double>>(j, "u_std", w);
    n.y_mean = get<std::vector<double>>(j, "y_mean", w);
    n.y_std = get<std::vector<double>>(j, "y_std", w);
    if (n.enabled) {
      const std::size_t in = file.model.input_channels();
      const std::size_t out = file.model.output_channels();
      if (n.u_mean.size() != in || n.u_std.size() != in || n.y_mean.size() != out ||
          n.y_std.size() != out) {
        throw FormatError(w + ": statistics do not match the model's channel counts");
      }
      for (const auto* v : {&n.u_std, &n.y_std}) {
        for (double s : *v) {
          if (!(s > 0.0) || !std::isfinite(s)) {
            throw FormatError(w + ": standard deviations must be positive and finite");
          }
        }
      }
    }
  }
  if (root.contains("noise_model")) {
    file.noise_check = tf_from_json(root.at("noise_model"), where + ".noise_model");
  }
  if (root.contains("quantizer")) {
    const json& j = root.at("quantizer");
    reject_unknown(j, {"thresholds"}, where + ".quantizer");
    try {
      file.quantizer = Quantizer(get<std::vector<double>>(j, "thresholds", where));
    } catch (const std::invalid_argument& e) {
      throw FormatError(where + ".quantizer: " + e.what());
    }
  }
  if (root.contains("log_sigma_e")) {
    file.log_sigma_e = get<double>(root, "log_sigma_e", where);
  }
  return file;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  write_text_file(path, model_to_json(file));
}

ModelFile load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

void check_sisio(const Signal& u, std::size_t batch, std::size_t length, const char* what) {
  if (u.channels() != 1 || u.batch() != batch || u.length() != length) {
    throw ShapeError(std::string("write_dataset_csv: ") + what +
                     " must be single-channel with matching batch and length");
  }
}

template <typename Cell>
std::string dataset_text(const Signal& u, const char* third, Cell cell) {
  std::string out = std::string("t,u,") + third + "\n";
  for (std::size_t b = 0; b < u.batch(); ++b) {
    for (std::size_t t = 0; t < u.length(); ++t) {
      out += std::to_string(t);
      out += ',';
      append_number(out, u(b, t, 0));
      out += ',';
      cell(out, b, t);
      out += '\n';
    }
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw FormatError("CSV line " + std::to_string(line) + ": cannot parse '" +
                      std::string(s) + "' as a number");
  }
  return v;
}

}  // namespace

void write_dataset_csv(const std::filesystem::path& path, const Signal& u,
                       const Signal& y) {
  check_sisio(u, u.batch(), u.length(), "u");
  check_sisio(y, u.batch(), u.length(), "y");
  write_text_file(path, dataset_text(u, "y", [&](std::string& out, std::size_t b,
                                                 std::size_t t) { append_number(out, y(b, t, 0)); }));
}

void write_dataset_csv(const std::filesystem::path& path, const Signal& u,
                       const BinSignal& z) {
  check_sisio(u, u.batch(), u.length(), "u");
  if (z.batch != u.batch() || z.length != u.length()) {
    throw ShapeError("write_dataset_csv: z must match the batch and length of u");
  }
  write_text_file(path, dataset_text(u, "z", [&](std::string& out, std::size_t b,
                                                 std::size_t t) { out += std::to_string(z(b, t)); }));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("CSV '" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool quantized = false;
  if (line == "t,u,z") {
    quantized = true;
  } else if (line != "t,u,y") {
    throw FormatError("CSV '" + path.string() + "': header must be 't,u,y' or 't,u,z'");
  }

  std::vector<std::vector<double>> us, ys;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::string_view view(line);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= view.size(); ++i) {
      if (i == view.size() || view[i] == ',') {
        fields.push_back(view.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 3) {
      throw FormatError("CSV line " + std::to_string(lineno) + ": expected 3 fields");
    }
    const double t = parse_double(fields[0], lineno);
    const std::size_t expected = us.empty() ? 0 : us.back().size();
    if (t == 0.0) {
      us.emplace_back();
      ys.emplace_back();
    } else if (us.empty() || t != static_cast<double>(expected)) {
      throw FormatError("CSV line " + std::to_string(lineno) +
                        ": time index must count up from 0 within a sequence");
    }
    us.back().push_back(parse_double(fields[1], lineno));
    const double third = parse_double(fields[2], lineno);
    if (quantized && third != static_cast<double>(static_cast<int>(third))) {
      throw FormatError("CSV line " + std::to_string(lineno) + ": z must be an integer");
    }
    ys.back().push_back(third);
  }
  if (us.empty()) throw FormatError("CSV '" + path.string() + "' has no data rows");
  const std::size_t T = us.front().size();
  for (const auto& s : us) {
    if (s.size() != T) throw FormatError("CSV '" + path.string() + "': sequences differ in length");
  }

  Dataset ds;
  ds.u = Signal(us.size(), T, 1);
  Signal y(us.size(), T, 1);
  BinSignal z{us.size(), T, std::vector<int>(us.size() * T)};
  for (std::size_t b = 0; b < us.size(); ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      ds.u(b, t, 0) = us[b][t];
      if (quantized) {
        z(b, t) = static_cast<int>(ys[b][t]);
      } else {
        y(b, t, 0) = ys[b][t];
      }
    }
  }
  if (quantized) {
    ds.z = std::move(z);
  } else {
    ds.y = std::move(y);
  }
  return ds;
}

}  // namespace dynonet
