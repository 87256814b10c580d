/* Copyright 2026 The CSDS Authors. All Rights Reserved.

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
#include "csds/nn.hpp"

#include "csds/error.hpp"

namespace csds {

Var ParameterSet::add(const std::string& name, Tensor init) {
  if (contains(name)) throw DataError("duplicate parameter name: " + name);
  index_[name] = vars_.size();
  names_.push_back(name);
  vars_.push_back(parameter(std::move(init)));
  return vars_.back();
}

const Var& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DataError("unknown parameter: " + name);
  return vars_[it->second];
}

std::vector<Var> ParameterSet::group(const std::string& prefix) const {
  std::vector<Var> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].rfind(prefix + ".", 0) == 0) out.push_back(vars_[i]);
  }
  return out;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : vars_) n += v.value().size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& v : vars_) v.zero_grad();
}

Linear::Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
               Rng& rng)
    : weight(params.add(name + ".weight", Tensor::xavier_uniform(in, out, {in, out}, rng))),
      bias(params.add(name + ".bias", Tensor({1, out}, 0.0))) {}

}  // namespace csds
