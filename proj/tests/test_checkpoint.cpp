#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "fixtures.hpp"
#include "tabsynth/checkpoint.hpp"
#include "tabsynth/error.hpp"

using namespace tabsynth;

namespace {

TabularModel small_model(ScalerMethod method = ScalerMethod::Quantile) {
  std::mt19937_64 rng(1);
  const auto data = fixtures::random_dataset(fixtures::mixed_schema(), 120, rng);
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 32;
  c.steps = 10;
  c.hidden = 16;
  c.layers = 2;
  c.time_embed_dim = 8;
  c.scaler = method;
  c.seed = 9;
  return train_model(data, c);
}

ErrorKind load_error(const std::string& bytes) {
  try {
    deserialize_checkpoint(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("checkpoint layout: magic, version, header, payload") {
  const auto model = small_model();
  const auto bytes = serialize_checkpoint(model);
  REQUIRE(bytes.size() > 16);
  CHECK(bytes.substr(0, 4) == "FNDF");
  CHECK(static_cast<unsigned char>(bytes[4]) == kCheckpointVersion);
  CHECK(bytes[5] == 0);
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  const auto header = nlohmann::json::parse(bytes.substr(16, len));
  CHECK(header["schema_hash"].get<std::uint64_t>() == schema_hash(model.schema));
  CHECK(header["network"]["hidden_layers"] == 2);
  CHECK(header["schedule"]["steps"] == 10);
  CHECK(header["provenance"]["epochs_run"] == 2);
  std::size_t payload = 0;
  for (const auto& a : header["arrays"]) {
    const auto shape = a["shape"].get<std::vector<std::size_t>>();
    CHECK(a["bytes"].get<std::size_t>() == shape[0] * shape[1] * 4);
    CHECK(a["offset"].get<std::size_t>() == payload);
    payload += a["bytes"].get<std::size_t>();
  }
  CHECK(header["arrays"][0]["name"] == "embedding");
  CHECK(bytes.size() == 16 + len + payload);
}

TEST_CASE("checkpoint round trip reproduces the model and its samples") {
  for (auto method : {ScalerMethod::Standard, ScalerMethod::YeoJohnson, ScalerMethod::Quantile}) {
    const auto model = small_model(method);
    fixtures::TempDir dir("ckpt");
    save_checkpoint(model, dir / "m.fndf");
    const auto loaded = load_checkpoint(dir / "m.fndf");
    CHECK(loaded.schema == model.schema);
    CHECK(loaded.config == model.config);
    CHECK(loaded.label_prior == model.label_prior);
    CHECK(loaded.final_loss == model.final_loss);
    CHECK(loaded.embeddings.weights == model.embeddings.weights);
    CHECK(loaded.network.config() == model.network.config());
    CHECK(loaded.network.params().hidden_weight[1] == model.network.params().hidden_weight[1]);
    CHECK(loaded.scaler.columns()[0].quantiles == model.scaler.columns()[0].quantiles);
    CHECK(serialize_checkpoint(loaded) == serialize_checkpoint(model));
    const auto a = sample(model, 64, std::nullopt, 5);
    const auto b = sample(loaded, 64, std::nullopt, 5);
    CHECK(format_csv(a) == format_csv(b));
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto bytes = serialize_checkpoint(small_model());
  CHECK(load_error("") == ErrorKind::CorruptCheckpoint);
  CHECK(load_error("XXXX" + bytes.substr(4)) == ErrorKind::CorruptCheckpoint);
  std::string v = bytes;
  v[4] = 9;
  CHECK(load_error(v) == ErrorKind::CorruptCheckpoint);
  CHECK(load_error(bytes.substr(0, bytes.size() - 4)) == ErrorKind::CorruptCheckpoint);
  CHECK(load_error(bytes.substr(0, 40)) == ErrorKind::CorruptCheckpoint);

  // tamper with the embedded schema without updating its hash
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  std::string header = bytes.substr(16, len);
  const auto pos = header.find("\"green\"");
  REQUIRE(pos != std::string::npos);
  header.replace(pos, 7, "\"GREEN\"");
  CHECK(load_error(bytes.substr(0, 16) + header + bytes.substr(16 + len)) == ErrorKind::CorruptCheckpoint);

  // declared shape disagrees with the network
  auto doc = nlohmann::ordered_json::parse(bytes.substr(16, len));
  doc["arrays"][1]["shape"][0] = 3;
  const std::string text = doc.dump();
  std::string patched = bytes.substr(0, 8);
  for (int i = 0; i < 8; ++i) patched.push_back(static_cast<char>((text.size() >> (8 * i)) & 0xFF));
  CHECK(load_error(patched + text + bytes.substr(16 + len)) == ErrorKind::CorruptCheckpoint);

  try {
    load_checkpoint("/definitely/not/here.fndf");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
  CHECK(exit_code(ErrorKind::CorruptCheckpoint) == 4);
}

TEST_CASE("equal seeds produce byte-identical checkpoints") {
  CHECK(serialize_checkpoint(small_model()) == serialize_checkpoint(small_model()));
}
