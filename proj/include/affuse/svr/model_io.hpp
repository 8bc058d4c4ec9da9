// affuse/svr/model_io.hpp

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "affuse/error.hpp"
#include "affuse/svr/svr.hpp"

namespace affuse::svr {

namespace io_internal {

inline std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace io_internal

/// JSON with every real written to 17 significant digits, so that doubles
/// survive a round trip bit for bit. Key order is fixed.
inline std::string EncodeSvrModel(const SvrModel &m) {
  using io_internal::Num;
  std::ostringstream os;
  os << "{\n  \"format\": \"affuse-svr\",\n  \"version\": 1,\n  \"config\": {\"c\": "
     << Num(m.config.c) << ", \"gamma\": " << Num(m.config.gamma)
     << ", \"epsilon\": " << Num(m.config.epsilon) << ", \"tolerance\": " << Num(m.config.tolerance)
     << ", \"max_passes\": " << m.config.max_passes << "},\n";
  os << "  \"bias\": " << Num(m.bias) << ",\n";
  os << "  \"converged\": " << (m.converged ? "true" : "false") << ",\n";
  os << "  \"iterations\": " << m.iterations << ",\n";
  os << "  \"kkt_gap\": " << Num(m.kkt_gap) << ",\n";
  os << "  \"objective\": " << Num(m.objective) << ",\n";
  os << "  \"dual_coeffs\": [";
  for (std::size_t i = 0; i < m.dual_coeffs.size(); ++i)
    os << (i ? ", " : "") << Num(m.dual_coeffs[i]);
  os << "],\n  \"support_vectors\": [";
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    os << (i ? ",\n    [" : "\n    [");
    for (std::size_t k = 0; k < m.support_vectors[i].size(); ++k)
      os << (k ? ", " : "") << Num(m.support_vectors[i][k]);
    os << "]";
  }
  os << (m.support_vectors.empty() ? "]\n}\n" : "\n  ]\n}\n");
  return os.str();
}

inline SvrModel DecodeSvrModel(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kParse, std::string("svr model is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "affuse-svr")
      Fail(ErrorKind::kParse, "not an affuse svr model");
    SvrModel m;
    const auto &c = j.at("config");
    m.config.c = c.at("c").get<double>();
    m.config.gamma = c.at("gamma").get<double>();
    m.config.epsilon = c.at("epsilon").get<double>();
    m.config.tolerance = c.at("tolerance").get<double>();
    m.config.max_passes = c.at("max_passes").get<std::size_t>();
    ValidateSvrConfig(m.config);
    m.bias = j.at("bias").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.kkt_gap = j.at("kkt_gap").get<double>();
    m.objective = j.at("objective").get<double>();
    m.dual_coeffs = j.at("dual_coeffs").get<std::vector<double>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    if (m.dual_coeffs.size() != m.support_vectors.size())
      Fail(ErrorKind::kParse, "svr model has mismatched support vector and dual counts");
    return m;
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kParse, std::string("malformed svr model: ") + e.what());
  }
}

inline void SaveSvrModel(const SvrModel &m, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << EncodeSvrModel(m);
  if (!out) Fail(ErrorKind::kIo, "write failed for " + path.string());
}

inline SvrModel LoadSvrModel(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return DecodeSvrModel(ss.str());
}

}  // namespace affuse::svr
