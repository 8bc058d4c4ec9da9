// affuse/stage1/model_io.hpp

// Copyright 2026  The affuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "affuse/error.hpp"
#include "affuse/stage1/network.hpp"

namespace affuse::stage1 {

// Container layout:
//   8 bytes   magic "AFFNET01"
//   8 bytes   little-endian uint64 header length H
//   H bytes   UTF-8 JSON header: format, input_dim, schema_id, config,
//             training_log and a tensor table {name, rows, cols, offset}
//   rest      little-endian IEEE-754 float64 tensors, column-major,
//             offsets counted in doubles from the start of this section.
inline constexpr char kModelMagic[8] = {'A', 'F', 'F', 'N', 'E', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "model container I/O assumes a little-endian host");

inline nlohmann::ordered_json NetConfigToJson(const NetConfig &c) {
  nlohmann::ordered_json j;
  j["hidden_layers"] = c.hidden_layers;
  j["hidden_activation"] = ActivationName(c.hidden_activation);
  j["output_activation"] = ActivationName(c.output_activation);
  j["dropout_rate"] = c.dropout_rate;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["shuffle"] = c.shuffle;
  j["seed"] = c.seed;
  return j;
}

inline NetConfig NetConfigFromJson(const nlohmann::json &j) {
  NetConfig c;
  c.hidden_layers = j.at("hidden_layers").get<std::vector<std::size_t>>();
  c.hidden_activation = ParseActivation(j.at("hidden_activation").get<std::string>());
  c.output_activation = ParseActivation(j.at("output_activation").get<std::string>());
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.shuffle = j.at("shuffle").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline std::string EncodeModel(const RegressorModel &m, const std::string &schema_id) {
  nlohmann::ordered_json header;
  header["format"] = "affuse-regressor";
  header["version"] = 1;
  header["input_dim"] = m.input_dim();
  header["schema_id"] = schema_id;
  header["config"] = NetConfigToJson(m.config());
  auto &log = header["training_log"] = nlohmann::ordered_json::array();
  for (const auto &e : m.training_log())
    log.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"dev_loss", e.dev_loss}});
  auto &tensors = header["tensors"] = nlohmann::ordered_json::array();
  std::vector<double> blob;
  auto add = [&](const std::string &name, const double *data, Eigen::Index rows, Eigen::Index cols) {
    tensors.push_back({{"name", name}, {"rows", rows}, {"cols", cols}, {"offset", blob.size()}});
    blob.insert(blob.end(), data, data + rows * cols);
  };
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    const auto &L = m.layers()[l];
    add("layer" + std::to_string(l) + ".weight", L.weight.data(), L.weight.rows(), L.weight.cols());
    add("layer" + std::to_string(l) + ".bias", L.bias.data(), L.bias.size(), 1);
  }
  const std::string h = header.dump();
  std::string out(kModelMagic, 8);
  const std::uint64_t len = h.size();
  out.append(reinterpret_cast<const char *>(&len), 8);
  out += h;
  out.append(reinterpret_cast<const char *>(blob.data()), blob.size() * sizeof(double));
  return out;
}

struct LoadedModel {
  RegressorModel model;
  std::string schema_id;
};

inline LoadedModel DecodeModel(const std::string &bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kModelMagic, 8) != 0)
    Fail(ErrorKind::kParse, "not an affuse regressor file");
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 8, 8);
  if (len > bytes.size() - 16) Fail(ErrorKind::kParse, "truncated model header");
  const auto header = nlohmann::json::parse(bytes.substr(16, len));
  const std::size_t blob_start = 16 + len;
  const std::size_t blob_doubles = (bytes.size() - blob_start) / sizeof(double);
  auto read = [&](const nlohmann::json &t, double *dst) {
    const std::size_t off = t.at("offset").get<std::size_t>();
    const std::size_t n = t.at("rows").get<std::size_t>() * t.at("cols").get<std::size_t>();
    if (off + n > blob_doubles) Fail(ErrorKind::kParse, "tensor extends past end of file");
    std::memcpy(dst, bytes.data() + blob_start + off * sizeof(double), n * sizeof(double));
  };
  const auto &tensors = header.at("tensors");
  if (tensors.size() % 2 != 0) Fail(ErrorKind::kParse, "tensor table must pair weights and biases");
  std::vector<DenseLayer> layers(tensors.size() / 2);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto &tw = tensors[2 * l], &tb = tensors[2 * l + 1];
    layers[l].weight.resize(tw.at("rows").get<Eigen::Index>(), tw.at("cols").get<Eigen::Index>());
    layers[l].bias.resize(tb.at("rows").get<Eigen::Index>());
    read(tw, layers[l].weight.data());
    read(tb, layers[l].bias.data());
  }
  LoadedModel out{RegressorModel(header.at("input_dim").get<std::size_t>(),
                                 NetConfigFromJson(header.at("config")), std::move(layers)),
                  header.at("schema_id").get<std::string>()};
  std::vector<EpochLog> log;
  for (const auto &e : header.at("training_log"))
    log.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                   e.at("dev_loss").get<double>()});
  out.model.set_training_log(std::move(log));
  return out;
}

inline void SaveModel(const std::filesystem::path &path, const RegressorModel &m,
                      const std::string &schema_id) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  const std::string bytes = EncodeModel(m, schema_id);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline LoadedModel LoadModel(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return DecodeModel(bytes);
}

}  // namespace affuse::stage1
