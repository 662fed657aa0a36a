/* Copyright 2026 The spkcls Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "spkcls/params.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "spkcls/errors.hpp"

namespace spkcls {

template <typename Real>
ParamStore<Real>::ParamStore(const ParamStore& other) {
  *this = other;
}

template <typename Real>
ParamStore<Real>& ParamStore<Real>::operator=(const ParamStore& other) {
  if (this == &other) return *this;
  params_.clear();
  index_ = other.index_;
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) {
    params_.push_back(std::make_unique<Parameter<Real>>(*p));
  }
  return *this;
}

template <typename Real>
Parameter<Real>& ParamStore<Real>::add(std::string name, Shape shape) {
  if (index_.contains(name)) {
    throw ContractError("duplicate parameter name '" + name + "'");
  }
  auto p = std::make_unique<Parameter<Real>>();
  p->name = name;
  p->value = Tensor<Real>(shape);
  p->grad.assign(shape.size(), Real(0));
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

template <typename Real>
Parameter<Real>* ParamStore<Real>::find(std::string_view name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

template <typename Real>
const Parameter<Real>* ParamStore<Real>::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

template <typename Real>
Parameter<Real>& ParamStore<Real>::get(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw ContractError("unknown parameter '" + std::string(name) + "'");
}

template <typename Real>
const Parameter<Real>& ParamStore<Real>::get(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw ContractError("unknown parameter '" + std::string(name) + "'");
}

template <typename Real>
std::size_t ParamStore<Real>::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p->value.values.size();
  return total;
}

template <typename Real>
void ParamStore<Real>::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.begin(), p->grad.end(), Real(0));
}

template <typename Real>
void ParamStore<Real>::copy_values_from(const ParamStore& other) {
  for (auto& p : params_) {
    const auto& src = other.get(p->name);
    if (src.value.shape != p->value.shape) {
      throw DimensionError("copy_values_from: shape mismatch for " + p->name);
    }
    p->value.values = src.value.values;
  }
}

template <typename Real>
void init_uniform(Parameter<Real>& p, Real bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-static_cast<double>(bound),
                                              static_cast<double>(bound));
  for (Real& v : p.value.values) v = static_cast<Real>(dist(rng));
}

const Tensor<double>* Checkpoint::find(std::string_view name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

template <typename Real>
Checkpoint make_checkpoint(const ParamStore<Real>& store,
                           std::map<std::string, std::string> meta) {
  Checkpoint ckpt;
  ckpt.precision = sizeof(Real) == 8 ? "f64" : "f32";
  ckpt.meta = std::move(meta);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store[i];
    std::vector<double> values(p.value.values.begin(), p.value.values.end());
    ckpt.tensors.emplace_back(p.name, Tensor<double>(p.value.shape, std::move(values)));
  }
  return ckpt;
}

template <typename Real>
void load_into(const Checkpoint& ckpt, ParamStore<Real>& store) {
  for (const auto& [name, tensor] : ckpt.tensors) {
    Parameter<Real>* p = store.find(name);
    if (p == nullptr) {
      throw FormatError("checkpoint tensor '" + name + "' has no matching parameter");
    }
    if (p->value.shape != tensor.shape) {
      throw FormatError("checkpoint tensor '" + name + "' has shape " +
                        tensor.shape.to_string() + ", parameter expects " +
                        p->value.shape.to_string());
    }
    for (std::size_t i = 0; i < tensor.values.size(); ++i) {
      p->value.values[i] = static_cast<Real>(tensor.values[i]);
    }
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (ckpt.find(store[i].name) == nullptr) {
      throw FormatError("checkpoint lacks parameter '" + store[i].name + "'");
    }
  }
}

namespace {

template <typename T>
void WriteHex(std::ostream& out, T v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  out.write(buf, res.ptr - buf);
}

template <typename T>
double ParseHex(std::string_view token) {
  T v{};
  bool negative = false;
  if (!token.empty() && token.front() == '-') {
    negative = true;
    token.remove_prefix(1);
  }
  auto res = std::from_chars(token.data(), token.data() + token.size(), v,
                             std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw FormatError("checkpoint: bad value '" + std::string(token) + "'");
  }
  return static_cast<double>(negative ? -v : v);
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  if (ckpt.precision != "f64" && ckpt.precision != "f32") {
    throw ContractError("checkpoint precision must be f32 or f64");
  }
  out << "spkcls-checkpoint " << kCheckpointVersion << "\n";
  out << "precision " << ckpt.precision << "\n";
  for (const auto& [key, value] : ckpt.meta) {
    out << "meta " << key << " " << value << "\n";
  }
  const bool f32 = ckpt.precision == "f32";
  for (const auto& [name, t] : ckpt.tensors) {
    out << "param " << name << " " << t.shape.rows << " " << t.shape.cols << "\n";
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      if (i) out << ' ';
      if (f32) {
        WriteHex(out, static_cast<float>(t.values[i]));
      } else {
        WriteHex(out, t.values[i]);
      }
    }
    out << "\n";
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ckpt;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("checkpoint: empty input");
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != "spkcls-checkpoint") throw FormatError("checkpoint: bad magic");
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
  }
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "precision") {
      ls >> ckpt.precision;
      if (ckpt.precision != "f64" && ckpt.precision != "f32") {
        throw FormatError("checkpoint: bad precision '" + ckpt.precision + "'");
      }
    } else if (tag == "meta") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      ckpt.meta[key] = value;
    } else if (tag == "param") {
      std::string name;
      Shape shape;
      if (!(ls >> name >> shape.rows >> shape.cols)) {
        throw FormatError("checkpoint: bad param header: " + line);
      }
      std::string body;
      if (!std::getline(in, body)) {
        throw FormatError("checkpoint: missing values for " + name);
      }
      std::vector<double> values;
      values.reserve(shape.size());
      std::istringstream vs(body);
      std::string tok;
      while (vs >> tok) {
        values.push_back(ckpt.precision == "f32" ? ParseHex<float>(tok)
                                                 : ParseHex<double>(tok));
      }
      if (values.size() != shape.size()) {
        throw FormatError("checkpoint: " + name + " expects " +
                          std::to_string(shape.size()) + " values, found " +
                          std::to_string(values.size()));
      }
      ckpt.tensors.emplace_back(name, Tensor<double>(shape, std::move(values)));
    } else if (tag == "end") {
      ended = true;
      break;
    } else {
      throw FormatError("checkpoint: unknown record '" + tag + "'");
    }
  }
  if (!ended) throw FormatError("checkpoint: truncated (no end marker)");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read checkpoint " + path.string());
  return read_checkpoint(in);
}

template class ParamStore<float>;
template class ParamStore<double>;
template void init_uniform<float>(Parameter<float>&, float, std::mt19937_64&);
template void init_uniform<double>(Parameter<double>&, double, std::mt19937_64&);
template Checkpoint make_checkpoint<float>(const ParamStore<float>&,
                                           std::map<std::string, std::string>);
template Checkpoint make_checkpoint<double>(const ParamStore<double>&,
                                            std::map<std::string, std::string>);
template void load_into<float>(const Checkpoint&, ParamStore<float>&);
template void load_into<double>(const Checkpoint&, ParamStore<double>&);

}  // namespace spkcls
