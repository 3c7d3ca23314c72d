#include "tabsynth/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <json.hpp>

#include "tabsynth/error.hpp"

namespace tabsynth {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorKind::CorruptCheckpoint, what); }

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(std::string_view bytes, std::size_t at) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    value |= static_cast<U>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  return value;
}

ordered_json config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"steps", c.steps},
          {"embed_dim", c.embed_dim},
          {"hidden", c.hidden},
          {"layers", c.layers},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"scaler", std::string(to_string(c.scaler))},
          {"freeze_embeddings", c.freeze_embeddings},
          {"embed_lr_scale", c.embed_lr_scale},
          {"beta_start", c.beta_start},
          {"beta_end", c.beta_end},
          {"quantiles", c.quantiles},
          {"time_embed_dim", c.time_embed_dim},
          {"activation", std::string(to_string(c.activation))},
          {"patience", c.patience}};
}

TrainConfig config_from_json(const ordered_json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.steps = j.at("steps").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.scaler = parse_scaler_method(j.at("scaler").get<std::string>());
  c.freeze_embeddings = j.at("freeze_embeddings").get<bool>();
  c.embed_lr_scale = j.at("embed_lr_scale").get<double>();
  c.beta_start = j.at("beta_start").get<double>();
  c.beta_end = j.at("beta_end").get<double>();
  c.quantiles = j.at("quantiles").get<std::size_t>();
  c.time_embed_dim = j.at("time_embed_dim").get<std::size_t>();
  c.activation = parse_activation(j.at("activation").get<std::string>());
  c.patience = j.at("patience").get<std::size_t>();
  return c;
}

ordered_json scaler_to_json(const NumericScaler& s) {
  ordered_json cols = ordered_json::array();
  for (const auto& c : s.columns())
    cols.push_back({{"mean", c.mean}, {"std", c.std}, {"lambda", c.lambda}, {"min", c.min}, {"max", c.max},
                    {"quantiles", c.quantiles}});
  return {{"method", std::string(to_string(s.method()))}, {"columns", cols}};
}

NumericScaler scaler_from_json(const ordered_json& j) {
  std::vector<ColumnScaler> cols;
  for (const auto& c : j.at("columns")) {
    ColumnScaler cs;
    cs.mean = c.at("mean").get<double>();
    cs.std = c.at("std").get<double>();
    cs.lambda = c.at("lambda").get<double>();
    cs.min = c.at("min").get<double>();
    cs.max = c.at("max").get<double>();
    cs.quantiles = c.at("quantiles").get<std::vector<double>>();
    cols.push_back(std::move(cs));
  }
  return NumericScaler(parse_scaler_method(j.at("method").get<std::string>()), std::move(cols));
}

void append_array(std::string& payload, ordered_json& directory, const std::string& name, const Matrix<float>& m) {
  directory.push_back({{"name", name},
                       {"shape", {m.rows(), m.cols()}},
                       {"offset", payload.size()},
                       {"bytes", static_cast<std::size_t>(m.size()) * sizeof(float)}});
  for (Eigen::Index i = 0; i < m.size(); ++i) put_le(payload, std::bit_cast<std::uint32_t>(m.data()[i]));
}

}  // namespace

std::uint64_t schema_hash(const TableSchema& schema) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : schema_to_json(schema)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string serialize_checkpoint(const TabularModel& model) {
  const auto& net = model.network.config();
  ordered_json header;
  header["format_version"] = kCheckpointVersion;
  header["schema"] = nlohmann::json::parse(schema_to_json(model.schema));
  header["schema_hash"] = schema_hash(model.schema);
  header["scaler"] = scaler_to_json(model.scaler);
  header["network"] = {{"input_width", net.input_width},   {"hidden_width", net.hidden_width},
                       {"hidden_layers", net.hidden_layers}, {"num_classes", net.num_classes},
                       {"time_embed_dim", net.time_embed_dim}, {"activation", std::string(to_string(net.activation))}};
  header["schedule"] = {{"steps", model.schedule.steps()},
                        {"beta_start", model.schedule.beta_start()},
                        {"beta_end", model.schedule.beta_end()}};
  header["label_prior"] = model.label_prior;
  header["provenance"] = {{"seed", model.config.seed},
                          {"epochs_run", model.epochs_run},
                          {"final_loss", model.final_loss},
                          {"config", config_to_json(model.config)}};

  std::string payload;
  ordered_json directory = ordered_json::array();
  append_array(payload, directory, "embedding", model.embeddings.weights);
  model.network.params().for_each(
      [&](const std::string& name, const Matrix<float>& m) { append_array(payload, directory, "network." + name, m); });
  header["arrays"] = directory;

  const std::string text = header.dump();
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le(out, kCheckpointVersion);
  put_le(out, static_cast<std::uint64_t>(text.size()));
  out += text;
  out += payload;
  return out;
}

TabularModel deserialize_checkpoint(std::string_view bytes) {
  constexpr std::size_t prefix = sizeof(kCheckpointMagic) + 4 + 8;
  if (bytes.size() < prefix || std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    corrupt("missing FNDF magic");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kCheckpointVersion) corrupt("unsupported checkpoint version " + std::to_string(version));
  const auto header_len = get_le<std::uint64_t>(bytes, 8);
  if (header_len > bytes.size() - prefix) corrupt("header length exceeds file size");
  const std::string_view payload = bytes.substr(prefix + header_len);

  try {
    const auto header = ordered_json::parse(bytes.substr(prefix, header_len));
    if (header.at("format_version").get<std::uint32_t>() != version) corrupt("header version mismatch");

    TabularModel model;
    model.schema = schema_from_json(header.at("schema").dump());
    if (header.at("schema_hash").get<std::uint64_t>() != schema_hash(model.schema)) corrupt("schema hash mismatch");
    model.scaler = scaler_from_json(header.at("scaler"));
    if (model.scaler.size() != model.schema.numeric_columns().size()) corrupt("scaler does not match schema");

    const auto& n = header.at("network");
    DenoiserConfig cfg;
    cfg.input_width = n.at("input_width").get<std::size_t>();
    cfg.hidden_width = n.at("hidden_width").get<std::size_t>();
    cfg.hidden_layers = n.at("hidden_layers").get<std::size_t>();
    cfg.num_classes = n.at("num_classes").get<std::size_t>();
    cfg.time_embed_dim = n.at("time_embed_dim").get<std::size_t>();
    cfg.activation = parse_activation(n.at("activation").get<std::string>());
    if (cfg.num_classes != model.schema.num_classes()) corrupt("class count does not match schema");
    {
      // bound allocations by the payload before building any tensor
      const double m = cfg.input_width, h = cfg.hidden_width, te = cfg.time_embed_dim, k = cfg.num_classes;
      const double floats = 2 * m * h + 2 * h + h * te + k * h + cfg.hidden_layers * (h * h + h) + m;
      if (floats * sizeof(float) > static_cast<double>(payload.size())) corrupt("payload shorter than declared network");
    }

    const auto& s = header.at("schedule");
    model.schedule = NoiseSchedule::linear(s.at("steps").get<std::size_t>(), s.at("beta_start").get<double>(),
                                           s.at("beta_end").get<double>());
    model.label_prior = header.at("label_prior").get<std::vector<double>>();
    if (model.label_prior.size() != cfg.num_classes) corrupt("label prior does not match class count");

    const auto& prov = header.at("provenance");
    model.config = config_from_json(prov.at("config"));
    model.epochs_run = prov.at("epochs_run").get<std::size_t>();
    model.final_loss = prov.at("final_loss").get<double>();

    // Fill arrays in directory order against the expected shapes.
    const auto& arrays = header.at("arrays");
    std::size_t next = 0;
    auto read_array = [&](const std::string& name, Matrix<float>& m) {
      if (next >= arrays.size()) corrupt("array directory is missing " + name);
      const auto& entry = arrays[next++];
      if (entry.at("name").get<std::string>() != name) corrupt("unexpected array " + entry.at("name").get<std::string>());
      const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
      if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) corrupt("shape mismatch for " + name);
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto len = entry.at("bytes").get<std::size_t>();
      if (len != static_cast<std::size_t>(m.size()) * sizeof(float)) corrupt("byte length mismatch for " + name);
      if (offset > payload.size() || len > payload.size() - offset) corrupt("array " + name + " exceeds payload");
      for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = std::bit_cast<float>(get_le<std::uint32_t>(payload, offset + static_cast<std::size_t>(i) * 4));
      if (!m.allFinite()) corrupt("non-finite values in " + name);
    };

    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    for (std::size_t c : model.schema.categorical_columns()) {
      sizes.push_back(model.schema.column(c).vocabulary.size());
      total += sizes.back();
    }
    const auto dim = model.config.embed_dim;
    if (cfg.input_width != encoded_width(model.schema, dim)) corrupt("input width does not match schema");
    Matrix<float> emb(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dim));
    read_array("embedding", emb);
    model.embeddings = Embeddings<float>(std::move(emb), std::move(sizes));

    auto params = DenoiserParameters<float>::zeros(cfg);
    params.for_each([&](const std::string& name, Matrix<float>& m) { read_array("network." + name, m); });
    if (next != arrays.size()) corrupt("unexpected trailing arrays");
    model.network = Denoiser<float>(cfg, std::move(params));
    return model;
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("malformed header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptCheckpoint) throw;
    corrupt(e.what());
  }
}

void save_checkpoint(const TabularModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

TabularModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace tabsynth
