#include "qldpc/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qldpc::nn {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr int kFormatVersion = 1;

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::string b64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    std::uint32_t w = (std::uint32_t)bytes[i] << 16 |
                      (std::uint32_t)bytes[i + 1] << 8 | bytes[i + 2];
    out.push_back(kB64Alphabet[(w >> 18) & 63]);
    out.push_back(kB64Alphabet[(w >> 12) & 63]);
    out.push_back(kB64Alphabet[(w >> 6) & 63]);
    out.push_back(kB64Alphabet[w & 63]);
  }
  std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    std::uint32_t w = (std::uint32_t)bytes[i] << 16;
    out.push_back(kB64Alphabet[(w >> 18) & 63]);
    out.push_back(kB64Alphabet[(w >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rem == 2) {
    std::uint32_t w = (std::uint32_t)bytes[i] << 16 | (std::uint32_t)bytes[i + 1] << 8;
    out.push_back(kB64Alphabet[(w >> 18) & 63]);
    out.push_back(kB64Alphabet[(w >> 12) & 63]);
    out.push_back(kB64Alphabet[(w >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> b64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("checkpoint: bad base64 length");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    std::uint32_t w = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      char c = text[i + j];
      if (c == '=') {
        if (i + 4 != text.size() || j < 2) {
          throw std::invalid_argument("checkpoint: bad base64 padding");
        }
        ++pad;
        w <<= 6;
        continue;
      }
      if (pad > 0) throw std::invalid_argument("checkpoint: bad base64 padding");
      int v = b64_value(c);
      if (v < 0) throw std::invalid_argument("checkpoint: bad base64 character");
      w = w << 6 | (std::uint32_t)v;
    }
    out.push_back((w >> 16) & 0xff);
    if (pad < 2) out.push_back((w >> 8) & 0xff);
    if (pad < 1) out.push_back(w & 0xff);
  }
  return out;
}

nlohmann::json tensor_payload(const Tensor& t) {
  return nlohmann::json{{"rows", t.rows},
                        {"cols", t.cols},
                        {"data", base64_encode_doubles(t.v)}};
}

Tensor tensor_from_payload(const nlohmann::json& j) {
  std::size_t rows = j.at("rows").get<std::size_t>();
  std::size_t cols = j.at("cols").get<std::size_t>();
  std::vector<double> data = base64_decode_doubles(j.at("data").get<std::string>());
  return Tensor::from(rows, cols, std::move(data));
}

}  // namespace

std::string base64_encode_doubles(const std::vector<double>& values) {
  std::vector<std::uint8_t> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &values[i], 8);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = (bits >> (8 * b)) & 0xff;
  }
  return b64_encode(bytes);
}

std::vector<double> base64_decode_doubles(const std::string& text) {
  std::vector<std::uint8_t> bytes = b64_decode(text);
  if (bytes.size() % 8 != 0) {
    throw std::invalid_argument("checkpoint: payload is not a whole number of f64");
  }
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= (std::uint64_t)bytes[i * 8 + b] << (8 * b);
    std::memcpy(&out[i], &bits, 8);
  }
  return out;
}

void save_checkpoint(const ParameterStore& store, const std::string& path,
                     const nlohmann::json& hyperparams,
                     const nlohmann::json& metadata) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, e] : store.entries()) {
    nlohmann::json p = tensor_payload(e.value);
    p["adam_m"] = base64_encode_doubles(e.adam_m.v);
    p["adam_v"] = base64_encode_doubles(e.adam_v.v);
    params[name] = std::move(p);
  }
  nlohmann::json doc{{"format", "qldpc-checkpoint"},
                     {"version", kFormatVersion},
                     {"step", store.step()},
                     {"hyperparams", hyperparams},
                     {"metadata", metadata},
                     {"params", std::move(params)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << doc.dump(1) << "\n";
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

CheckpointInfo load_checkpoint(ParameterStore& store, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint: " + path + " is not JSON: " + e.what());
  }
  if (doc.value("format", "") != "qldpc-checkpoint") {
    throw std::runtime_error("checkpoint: " + path + " has unknown format");
  }
  if (doc.value("version", -1) != kFormatVersion) {
    throw std::runtime_error("checkpoint: " + path + " has unsupported version");
  }
  store.clear();
  for (const auto& [name, p] : doc.at("params").items()) {
    Tensor value = tensor_from_payload(p);
    Tensor& slot = store.create(name, value.rows, value.cols);
    slot = std::move(value);
    ParameterStore::Entry& e = store.entries().at(name);
    std::vector<double> m = base64_decode_doubles(p.at("adam_m").get<std::string>());
    std::vector<double> v = base64_decode_doubles(p.at("adam_v").get<std::string>());
    if (m.size() != e.value.size() || v.size() != e.value.size()) {
      throw std::runtime_error("checkpoint: moment size mismatch for '" + name + "'");
    }
    e.adam_m.v = std::move(m);
    e.adam_v.v = std::move(v);
  }
  store.set_step(doc.at("step").get<std::size_t>());
  CheckpointInfo info;
  info.hyperparams = doc.value("hyperparams", nlohmann::json::object());
  info.metadata = doc.value("metadata", nlohmann::json::object());
  return info;
}

}  // namespace qldpc::nn
