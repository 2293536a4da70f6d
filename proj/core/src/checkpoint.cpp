// Copyright 2026 sxl authors
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

#include "sxl/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace sxl {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint32_t kCheckpointVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  const std::uint8_t b[4] = {
      static_cast<std::uint8_t>(v & 0xff),
      static_cast<std::uint8_t>((v >> 8) & 0xff),
      static_cast<std::uint8_t>((v >> 16) & 0xff),
      static_cast<std::uint8_t>((v >> 24) & 0xff),
  };
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is, std::uint64_t& offset,
                       const std::string& path, const char* what) {
  std::uint8_t b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (is.gcount() != 4) {
    throw LoadError(path + ": truncated while reading " + std::string(what) +
                    " (byte offset " + std::to_string(offset) + ")");
  }
  offset += 4;
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

Json model_to_json(const ModelConfig& m) {
  Json j;
  j["num_layers"] = m.num_layers;
  j["num_heads"] = m.num_heads;
  j["d_model"] = m.d_model;
  j["d_inner"] = m.d_inner;
  j["dropout_p"] = m.dropout_p;
  j["huber_delta"] = m.huber_delta;
  j["feat_dim"] = m.feat_dim;
  j["num_classes"] = m.num_classes;
  j["pos_encoding"] = m.pos_encoding;
  return j;
}

ModelConfig model_from_json(const Json& j) {
  ModelConfig m;
  m.num_layers = j.at("num_layers").get<int>();
  m.num_heads = j.at("num_heads").get<int>();
  m.d_model = j.at("d_model").get<int>();
  m.d_inner = j.at("d_inner").get<int>();
  m.dropout_p = j.at("dropout_p").get<double>();
  m.huber_delta = j.at("huber_delta").get<double>();
  m.feat_dim = j.at("feat_dim").get<int>();
  m.num_classes = j.at("num_classes").get<int>();
  m.pos_encoding = j.at("pos_encoding").get<std::string>();
  return m;
}

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32") return 4;
  if (dtype == "f64") return 8;
  throw LoadError("unknown tensor dtype \"" + dtype + "\"");
}

Json blob_table_json(const std::vector<const std::vector<TensorBlob>*>& groups,
                     const std::vector<std::string>& kinds) {
  Json table = Json::array();
  std::uint64_t offset = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& blob : *groups[g]) {
      Json row;
      row["name"] = blob.name;
      row["kind"] = kinds[g];
      row["shape"] = blob.shape;
      row["dtype"] = blob.dtype;
      row["offset"] = offset;
      table.push_back(row);
      offset += blob.bytes.size();
    }
  }
  return table;
}

}  // namespace

std::int64_t TensorBlob::element_count() const {
  std::int64_t n = 1;
  for (const int d : shape) n *= d;
  return n;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  Json header;
  header["model"] = model_to_json(ckpt.model);
  header["step"] = ckpt.step;
  header["rng_state"] = ckpt.rng_state;
  Json metrics = Json::array();
  for (const auto& row : ckpt.metrics) {
    metrics.push_back(Json::array({row.step, row.split, row.metric, row.value}));
  }
  header["metrics"] = metrics;
  if (ckpt.has_optimizer) {
    header["optimizer"] = Json{{"step", ckpt.opt_step}};
  } else {
    header["optimizer"] = nullptr;
  }
  std::vector<const std::vector<TensorBlob>*> groups = {&ckpt.params};
  std::vector<std::string> kinds = {"param"};
  if (ckpt.has_optimizer) {
    groups.push_back(&ckpt.opt_m);
    groups.push_back(&ckpt.opt_v);
    kinds.emplace_back("adam_m");
    kinds.emplace_back("adam_v");
  }
  header["tensors"] = blob_table_json(groups, kinds);

  const std::string header_text = header.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path);
  os.write("SXCK", 4);
  write_u32(os, kCheckpointVersion);
  write_u32(os, static_cast<std::uint32_t>(header_text.size()));
  os.write(header_text.data(),
           static_cast<std::streamsize>(header_text.size()));
  for (const auto* group : groups) {
    for (const auto& blob : *group) {
      os.write(reinterpret_cast<const char*>(blob.bytes.data()),
               static_cast<std::streamsize>(blob.bytes.size()));
    }
  }
  if (!os) throw InputError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open checkpoint: " + path);
  std::uint64_t offset = 0;
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, "SXCK", 4) != 0) {
    throw LoadError(path + ": bad magic, not a checkpoint file");
  }
  offset += 4;
  Checkpoint ckpt;
  ckpt.version = read_u32(is, offset, path, "version");
  if (ckpt.version != kCheckpointVersion) {
    throw LoadError(path + ": unsupported checkpoint version " +
                    std::to_string(ckpt.version));
  }
  const std::uint32_t header_len = read_u32(is, offset, path, "header length");
  std::string header_text(header_len, '\0');
  is.read(header_text.data(), header_len);
  if (static_cast<std::uint32_t>(is.gcount()) != header_len) {
    throw LoadError(path + ": truncated JSON header (byte offset " +
                    std::to_string(offset) + ")");
  }
  offset += header_len;

  Json header;
  try {
    header = Json::parse(header_text);
  } catch (const std::exception& e) {
    throw LoadError(path + ": corrupt JSON header: " + e.what());
  }
  ckpt.model = model_from_json(header.at("model"));
  ckpt.step = header.at("step").get<std::int64_t>();
  ckpt.rng_state = header.at("rng_state").get<std::string>();
  for (const auto& row : header.at("metrics")) {
    MetricRow m;
    m.step = row.at(0).get<std::int64_t>();
    m.split = row.at(1).get<std::string>();
    m.metric = row.at(2).get<std::string>();
    m.value = row.at(3).get<double>();
    ckpt.metrics.push_back(std::move(m));
  }
  if (!header.at("optimizer").is_null()) {
    ckpt.has_optimizer = true;
    ckpt.opt_step = header.at("optimizer").at("step").get<std::int64_t>();
  }

  std::uint64_t expected_offset = 0;
  for (const auto& row : header.at("tensors")) {
    TensorBlob blob;
    blob.name = row.at("name").get<std::string>();
    blob.shape = row.at("shape").get<std::vector<int>>();
    blob.dtype = row.at("dtype").get<std::string>();
    const std::uint64_t blob_offset = row.at("offset").get<std::uint64_t>();
    if (blob_offset != expected_offset) {
      throw LoadError(path + ": corrupt tensor offset table at \"" +
                      blob.name + "\"");
    }
    const std::size_t nbytes =
        static_cast<std::size_t>(blob.element_count()) *
        dtype_size(blob.dtype);
    blob.bytes.resize(nbytes);
    is.read(reinterpret_cast<char*>(blob.bytes.data()),
            static_cast<std::streamsize>(nbytes));
    if (static_cast<std::size_t>(is.gcount()) != nbytes) {
      throw LoadError(path + ": truncated payload for tensor \"" + blob.name +
                      "\" (byte offset " + std::to_string(offset) + ")");
    }
    offset += nbytes;
    expected_offset += nbytes;
    const std::string kind = row.at("kind").get<std::string>();
    if (kind == "param") {
      ckpt.params.push_back(std::move(blob));
    } else if (kind == "adam_m") {
      ckpt.opt_m.push_back(std::move(blob));
    } else if (kind == "adam_v") {
      ckpt.opt_v.push_back(std::move(blob));
    } else {
      throw LoadError(path + ": unknown tensor kind \"" + kind + "\"");
    }
  }
  return ckpt;
}

template <typename T>
TensorBlob blob_from_tensor(const std::string& name, const Tensor<T>& t) {
  TensorBlob blob;
  blob.name = name;
  blob.shape = t.shape();
  blob.dtype = std::is_same_v<T, double> ? "f64" : "f32";
  blob.bytes.resize(t.data().size() * sizeof(T));
  std::memcpy(blob.bytes.data(), t.data().data(), blob.bytes.size());
  return blob;
}

template <typename T>
std::vector<T> blob_values(const TensorBlob& blob) {
  const std::size_t n = static_cast<std::size_t>(blob.element_count());
  if (blob.bytes.size() != n * dtype_size(blob.dtype)) {
    throw LoadError("tensor \"" + blob.name + "\" payload size mismatch");
  }
  std::vector<T> out(n);
  if (blob.dtype == "f32") {
    std::vector<float> tmp(n);
    std::memcpy(tmp.data(), blob.bytes.data(), blob.bytes.size());
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(tmp[i]);
  } else {
    std::vector<double> tmp(n);
    std::memcpy(tmp.data(), blob.bytes.data(), blob.bytes.size());
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(tmp[i]);
  }
  return out;
}

template <typename T>
Checkpoint make_checkpoint(const ParamSet<T>& params,
                           const AdamState<T>* opt_state) {
  Checkpoint ckpt;
  ckpt.model = params.config;
  for (const auto& name : params.names) {
    ckpt.params.push_back(blob_from_tensor(name, *params.at(name)));
  }
  if (opt_state) {
    ckpt.has_optimizer = true;
    ckpt.opt_step = opt_state->step;
    for (const auto& name : opt_state->names) {
      const auto& shape = params.at(name)->shape();
      TensorBlob m;
      m.name = name;
      m.shape = shape;
      m.dtype = std::is_same_v<T, double> ? "f64" : "f32";
      m.bytes.resize(opt_state->m.at(name).size() * sizeof(T));
      std::memcpy(m.bytes.data(), opt_state->m.at(name).data(),
                  m.bytes.size());
      TensorBlob v = m;
      std::memcpy(v.bytes.data(), opt_state->v.at(name).data(),
                  v.bytes.size());
      ckpt.opt_m.push_back(std::move(m));
      ckpt.opt_v.push_back(std::move(v));
    }
  }
  return ckpt;
}

template <typename T>
ParamSet<T> params_from_checkpoint(const Checkpoint& ckpt) {
  const auto table = param_shape_table(ckpt.model);
  if (table.size() != ckpt.params.size()) {
    throw LoadError("checkpoint holds " + std::to_string(ckpt.params.size()) +
                    " tensors but the model config expects " +
                    std::to_string(table.size()));
  }
  ParamSet<T> params;
  params.config = ckpt.model;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& [name, shape] = table[i];
    const auto& blob = ckpt.params[i];
    if (blob.name != name || blob.shape != shape) {
      throw LoadError("checkpoint tensor \"" + blob.name + "\" with shape " +
                      shape_str(blob.shape) + " does not match expected \"" +
                      name + "\" " + shape_str(shape));
    }
    params.add(name,
               Tensor<T>::from_data(shape, blob_values<T>(blob), true));
  }
  return params;
}

template <typename T>
void load_encoder_weights(ParamSet<T>& params, const Checkpoint& ckpt) {
  std::unordered_map<std::string, const TensorBlob*> by_name;
  for (const auto& blob : ckpt.params) by_name.emplace(blob.name, &blob);

  std::string bad;
  for (const auto& name : params.names) {
    if (name.rfind("cls_head.", 0) == 0) continue;  // head stays fresh
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      bad += bad.empty() ? name : ", " + name;
      continue;
    }
    if (it->second->shape != params.at(name)->shape()) {
      bad += bad.empty() ? name : ", " + name;
    }
  }
  if (!bad.empty()) {
    throw LoadError("checkpoint does not match model; offending tensors: " +
                    bad);
  }
  for (const auto& name : params.names) {
    if (name.rfind("cls_head.", 0) == 0) continue;
    const auto& blob = *by_name.at(name);
    params.at(name)->data() = blob_values<T>(blob);
  }
}

void write_metrics_csv(const std::vector<MetricRow>& metrics,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << "step,split,metric,value\n";
  char buf[64];
  for (const auto& row : metrics) {
    std::snprintf(buf, sizeof(buf), "%.17g", row.value);
    os << row.step << ',' << row.split << ',' << row.metric << ',' << buf
       << '\n';
  }
  if (!os) throw InputError("write failed: " + path);
}

#define SXL_INSTANTIATE_CKPT(T)                                             \
  template TensorBlob blob_from_tensor<T>(const std::string&,               \
                                          const Tensor<T>&);                \
  template std::vector<T> blob_values<T>(const TensorBlob&);                \
  template Checkpoint make_checkpoint<T>(const ParamSet<T>&,                \
                                         const AdamState<T>*);              \
  template ParamSet<T> params_from_checkpoint<T>(const Checkpoint&);        \
  template void load_encoder_weights<T>(ParamSet<T>&, const Checkpoint&);

SXL_INSTANTIATE_CKPT(float)
SXL_INSTANTIATE_CKPT(double)

#undef SXL_INSTANTIATE_CKPT

}  // namespace sxl
