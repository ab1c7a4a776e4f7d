#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spikebench/coding.hpp"
#include "spikebench/error.hpp"
#include "spikebench/idx.hpp"
#include "spikebench/model.hpp"
#include "spikebench/scale_plan.hpp"

// SNNX v1 model files: a JSON manifest plus a flat blob of little-endian
// float32 tensors (row-major). The manifest lists, per layer, its kind, shape
// and each tensor's dtype, byte offset and length in the blob. Converted
// models carry an extra "snn" section with coding, thresholds, window
// offsets and the applied scale plan.
namespace spikebench {

inline constexpr int kSnnxVersion = 1;

struct SnnxFile {
  DnnModel dnn;
  std::optional<SnnModel> snn;
};

namespace snnx_detail {

using ojson = nlohmann::ordered_json;

inline std::filesystem::path blob_path_for(const std::filesystem::path& manifest) {
  std::filesystem::path stem = manifest.filename();
  if (stem.extension() == ".json") stem = stem.stem();
  if (stem.extension() == ".snnx") stem = stem.stem();
  return stem.string() + ".bin";
}

inline void append_f32(std::vector<std::uint8_t>& blob, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int k = 0; k < 4; ++k) blob.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
}

inline ojson tensor_entry(const char* role, std::vector<int> shape, const std::vector<double>& values,
                          std::vector<std::uint8_t>& blob) {
  ojson t;
  t["role"] = role;
  t["shape"] = shape;
  t["dtype"] = "<f4";
  t["offset"] = blob.size();
  t["length"] = values.size() * 4;
  for (double v : values) append_f32(blob, v);
  return t;
}

inline ojson coding_json(const CodingConfig& c) {
  ojson j;
  j["scheme"] = std::string(to_string(c.scheme));
  j["timesteps"] = c.timesteps;
  j["theta"] = c.theta;
  j["phase_period"] = c.phase_period;
  j["burst_cap"] = c.burst_cap;
  j["tau"] = c.tau;
  j["burst_duration"] = c.burst_duration;
  j["theta_decay"] = c.theta_decay ? ojson(*c.theta_decay) : ojson(nullptr);
  return j;
}

inline ojson plan_json(const ScalePlan& p) {
  ojson j;
  j["C"] = p.C;
  j["C_A"] = p.C_A;
  j["provenance"] = std::string(to_string(p.provenance));
  j["scale_biases"] = p.scale_biases;
  if (!p.layers.empty()) j["layers"] = p.layers;
  return j;
}

inline void write_bytes(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void write(const std::filesystem::path& manifest_path, const DnnModel& dnn, const SnnModel* snn) {
  dnn.validate();
  const auto blob_name = blob_path_for(manifest_path);
  std::vector<std::uint8_t> blob;
  ojson doc;
  doc["format"] = "SNNX";
  doc["version"] = kSnnxVersion;
  doc["blob"] = blob_name.string();
  doc["input_shape"] = dnn.input_shape;
  ojson layers = ojson::array();
  for (const auto& layer : dnn.layers) {
    ojson l;
    l["name"] = layer_name(layer);
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      l["kind"] = "dense";
      l["in_features"] = d->in_features;
      l["out_features"] = d->out_features;
      l["tensors"] = {tensor_entry("weight", {d->out_features, d->in_features}, d->weight, blob),
                      tensor_entry("bias", {d->out_features}, d->bias, blob)};
    } else {
      const auto& c = std::get<Conv2dLayer>(layer);
      l["kind"] = "conv2d";
      l["in_channels"] = c.in_channels;
      l["in_height"] = c.in_height;
      l["in_width"] = c.in_width;
      l["out_channels"] = c.out_channels;
      l["kernel"] = {c.kernel_h, c.kernel_w};
      l["stride"] = c.stride;
      l["padding"] = c.padding;
      l["tensors"] = {tensor_entry("weight", {c.out_channels, c.in_channels, c.kernel_h, c.kernel_w}, c.weight, blob),
                      tensor_entry("bias", {c.out_channels}, c.bias, blob)};
    }
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);
  if (snn) {
    ojson s;
    s["coding"] = coding_json(snn->coding);
    s["thresholds"] = snn->thresholds;
    s["window_offsets"] = snn->window_offsets;
    s["scale_plan"] = snn->applied_plan ? plan_json(*snn->applied_plan) : ojson(nullptr);
    doc["snn"] = std::move(s);
  }
  const std::string text = doc.dump(2) + "\n";
  write_bytes(manifest_path.parent_path() / blob_name, blob.data(), blob.size());
  write_bytes(manifest_path, text.data(), text.size());
}

// Manifest field access with FormatError on a missing key or wrong type.
template <typename T>
T field(const ojson& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("manifest is missing '") + key + "'", 0);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("manifest field '") + key + "' has the wrong type", 0);
  }
}

inline std::vector<double> read_tensor(const ojson& layer, const char* role, const std::vector<int>& expected_shape,
                                       const std::vector<std::uint8_t>& blob) {
  for (const auto& t : field<ojson>(layer, "tensors")) {
    if (field<std::string>(t, "role") != role) continue;
    const auto dtype = field<std::string>(t, "dtype");
    const auto offset = field<std::size_t>(t, "offset");
    const auto length = field<std::size_t>(t, "length");
    if (dtype != "<f4") throw FormatError("tensor dtype must be '<f4', got '" + dtype + "'", offset);
    if (field<std::vector<int>>(t, "shape") != expected_shape)
      throw FormatError(std::string("tensor '") + role + "' of layer '" + field<std::string>(layer, "name") +
                            "' has an unexpected shape",
                        offset);
    std::size_t count = 1;
    for (int d : expected_shape) count *= static_cast<std::size_t>(d);
    if (length != count * 4) throw FormatError("tensor length does not match its shape", offset);
    if (offset > blob.size() || length > blob.size() - offset)
      throw FormatError("tensor extends past the end of the blob", blob.size());
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint8_t* p = blob.data() + offset + 4 * i;
      const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
                                 (std::uint32_t{p[3]} << 24);
      values[i] = std::bit_cast<float>(bits);
    }
    return values;
  }
  throw FormatError(std::string("layer '") + field<std::string>(layer, "name") + "' has no " + role + " tensor", 0);
}

inline CodingConfig parse_coding(const ojson& j) {
  CodingConfig c;
  c.scheme = parse_scheme(field<std::string>(j, "scheme"));
  c.timesteps = field<int>(j, "timesteps");
  c.theta = field<double>(j, "theta");
  c.phase_period = field<int>(j, "phase_period");
  c.burst_cap = field<int>(j, "burst_cap");
  c.tau = field<double>(j, "tau");
  c.burst_duration = field<int>(j, "burst_duration");
  if (j.contains("theta_decay") && !j.at("theta_decay").is_null()) c.theta_decay = field<double>(j, "theta_decay");
  return c;
}

inline ScalePlan parse_plan(const ojson& j) {
  ScalePlan p;
  p.C = field<double>(j, "C");
  p.C_A = field<double>(j, "C_A");
  p.provenance = parse_provenance(field<std::string>(j, "provenance"));
  p.scale_biases = field<bool>(j, "scale_biases");
  if (j.contains("layers")) p.layers = field<std::vector<bool>>(j, "layers");
  return p;
}

}  // namespace snnx_detail

inline void write_snnx(const std::filesystem::path& manifest, const DnnModel& dnn) {
  snnx_detail::write(manifest, dnn, nullptr);
}

inline void write_snnx(const std::filesystem::path& manifest, const SnnModel& snn) {
  snn.validate();
  snnx_detail::write(manifest, snn.net, &snn);
}

inline SnnxFile read_snnx(const std::filesystem::path& manifest_path) {
  using snnx_detail::field;
  using snnx_detail::ojson;
  const auto text = detail::read_file(manifest_path);
  ojson doc;
  try {
    doc = ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what(), e.byte);
  }
  if (field<std::string>(doc, "format") != "SNNX") throw FormatError("not an SNNX manifest", 0);
  if (field<int>(doc, "version") != kSnnxVersion)
    throw FormatError("unsupported SNNX version " + std::to_string(field<int>(doc, "version")), 0);
  const auto blob = detail::read_file(manifest_path.parent_path() / field<std::string>(doc, "blob"));

  SnnxFile file;
  file.dnn.input_shape = field<std::vector<int>>(doc, "input_shape");
  for (const auto& l : field<ojson>(doc, "layers")) {
    const auto name = field<std::string>(l, "name");
    const auto kind = field<std::string>(l, "kind");
    if (kind == "dense") {
      DenseLayer d;
      d.name = name;
      d.in_features = field<int>(l, "in_features");
      d.out_features = field<int>(l, "out_features");
      d.weight = snnx_detail::read_tensor(l, "weight", {d.out_features, d.in_features}, blob);
      d.bias = snnx_detail::read_tensor(l, "bias", {d.out_features}, blob);
      file.dnn.layers.emplace_back(std::move(d));
    } else if (kind == "conv2d") {
      Conv2dLayer c;
      c.name = name;
      c.in_channels = field<int>(l, "in_channels");
      c.in_height = field<int>(l, "in_height");
      c.in_width = field<int>(l, "in_width");
      c.out_channels = field<int>(l, "out_channels");
      const auto kernel = field<std::vector<int>>(l, "kernel");
      if (kernel.size() != 2) throw FormatError("conv2d kernel must have two sizes", 0);
      c.kernel_h = kernel[0];
      c.kernel_w = kernel[1];
      c.stride = field<int>(l, "stride");
      c.padding = field<int>(l, "padding");
      c.weight = snnx_detail::read_tensor(l, "weight", {c.out_channels, c.in_channels, c.kernel_h, c.kernel_w}, blob);
      c.bias = snnx_detail::read_tensor(l, "bias", {c.out_channels}, blob);
      file.dnn.layers.emplace_back(std::move(c));
    } else {
      throw UnsupportedLayer(name, kind);
    }
  }
  file.dnn.validate();

  if (doc.contains("snn") && !doc.at("snn").is_null()) {
    const auto& s = doc.at("snn");
    SnnModel snn;
    snn.net = file.dnn;
    snn.coding = snnx_detail::parse_coding(field<ojson>(s, "coding"));
    snn.thresholds = field<std::vector<double>>(s, "thresholds");
    snn.window_offsets = field<std::vector<int>>(s, "window_offsets");
    if (s.contains("scale_plan") && !s.at("scale_plan").is_null())
      snn.applied_plan = snnx_detail::parse_plan(s.at("scale_plan"));
    snn.validate();
    file.snn = std::move(snn);
  }
  return file;
}

inline DnnModel read_dnn(const std::filesystem::path& manifest) { return read_snnx(manifest).dnn; }

inline SnnModel read_snn(const std::filesystem::path& manifest) {
  auto file = read_snnx(manifest);
  if (!file.snn) throw FormatError("'" + manifest.string() + "' holds no converted SNN section", 0);
  return std::move(*file.snn);
}

}  // namespace spikebench
