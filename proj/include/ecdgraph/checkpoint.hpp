// Copyright 2026 The ecdgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary checkpoint layout (all integers and floats little-endian):
//
//   char[8]   magic "ECDGCKPT"
//   u32       format version (1)
//   u64       length of the config JSON, then its UTF-8 bytes
//   u64       tensor count, then per tensor: u64 rows, u64 cols,
//             rows*cols f64 values (parameter declaration order)
//   u8        1 if optimizer state follows, else 0
//   [u64 step, then per parameter the m, v, v_hat tensors in the same
//    tensor layout]

#ifndef ECDGRAPH_CHECKPOINT_HPP
#define ECDGRAPH_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ecdgraph/config.hpp"
#include "ecdgraph/errors.hpp"
#include "ecdgraph/model.hpp"
#include "ecdgraph/optim.hpp"

namespace ecd {

inline constexpr char kCheckpointMagic[8] = {'E', 'C', 'D', 'G',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  nlohmann::json metadata;  // free-form: best epoch, class weights, ...
  ParamSet params;
  std::vector<MomentState> optimizer_state;
  std::int64_t optimizer_step = 0;
};

namespace detail {

template <typename T>
void PutLe(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::uint8_t>>;
  U bits = std::bit_cast<U>(value);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T GetLe(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::uint8_t>>;
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw ValidationError("checkpoint: unexpected end of file");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<U>(buf[i]) << (8 * i));
  }
  return std::bit_cast<T>(bits);
}

inline void PutTensor(std::ostream& out, const Matrix& m) {
  PutLe<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  PutLe<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.size(); ++i) PutLe<double>(out, m.data()[i]);
}

inline Matrix GetTensor(std::istream& in, Index rows, Index cols) {
  const auto r = GetLe<std::uint64_t>(in);
  const auto c = GetLe<std::uint64_t>(in);
  if (static_cast<Index>(r) != rows || static_cast<Index>(c) != cols) {
    throw ValidationError("checkpoint: tensor shape (" + std::to_string(r) +
                          "x" + std::to_string(c) + ") does not match config (" +
                          std::to_string(rows) + "x" + std::to_string(cols) +
                          ")");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = GetLe<double>(in);
  return m;
}

}  // namespace detail

inline void SaveCheckpoint(const std::filesystem::path& path,
                           const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TrainingError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::PutLe<std::uint32_t>(out, kCheckpointVersion);
  nlohmann::json header = {{"config", ToJson(ckpt.config)},
                           {"metadata", ckpt.metadata}};
  const std::string text = header.dump();
  detail::PutLe<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const std::vector<Var> tensors = ckpt.params.All();
  detail::PutLe<std::uint64_t>(out, tensors.size());
  for (const Var& t : tensors) detail::PutTensor(out, t.value());
  const bool has_state = !ckpt.optimizer_state.empty();
  detail::PutLe<std::uint8_t>(out, has_state ? 1 : 0);
  if (has_state) {
    if (ckpt.optimizer_state.size() != tensors.size()) {
      throw TrainingError("checkpoint: optimizer state does not match params");
    }
    detail::PutLe<std::uint64_t>(out,
                                 static_cast<std::uint64_t>(ckpt.optimizer_step));
    for (const MomentState& s : ckpt.optimizer_state) {
      detail::PutTensor(out, s.m);
      detail::PutTensor(out, s.v);
      detail::PutTensor(out, s.v_hat);
    }
  }
  if (!out) throw TrainingError("failed writing checkpoint " + path.string());
}

inline Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ValidationError(path.string() + ": not a checkpoint file");
  }
  const auto version = detail::GetLe<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ValidationError(path.string() + ": unsupported checkpoint version " +
                          std::to_string(version));
  }
  const auto len = detail::GetLe<std::uint64_t>(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw ValidationError(path.string() + ": truncated header");
  }
  Checkpoint ckpt;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed header: " + e.what());
  }
  ckpt.config = ParseTrainConfig(header.at("config"));
  ckpt.metadata = header.value("metadata", nlohmann::json::object());

  // Shapes come from the config; values are overwritten below.
  Rng rng;
  ckpt.params = ParamSet::Init(ckpt.config.model, rng);
  std::vector<Var> tensors = ckpt.params.All();
  const auto count = detail::GetLe<std::uint64_t>(in);
  if (count != tensors.size()) {
    throw ValidationError(path.string() + ": expected " +
                          std::to_string(tensors.size()) + " tensors, found " +
                          std::to_string(count));
  }
  for (Var& t : tensors) {
    t.mutable_value() = detail::GetTensor(in, t.rows(), t.cols());
  }
  if (detail::GetLe<std::uint8_t>(in) == 1) {
    ckpt.optimizer_step = static_cast<std::int64_t>(detail::GetLe<std::uint64_t>(in));
    for (const Var& t : tensors) {
      MomentState s;
      s.m = detail::GetTensor(in, t.rows(), t.cols());
      s.v = detail::GetTensor(in, t.rows(), t.cols());
      s.v_hat = detail::GetTensor(in, t.rows(), t.cols());
      ckpt.optimizer_state.push_back(std::move(s));
    }
  }
  return ckpt;
}

}  // namespace ecd

#endif  // ECDGRAPH_CHECKPOINT_HPP
