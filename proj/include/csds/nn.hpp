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
#ifndef CSDS_NN_HPP_
#define CSDS_NN_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "csds/autograd.hpp"
#include "csds/rng.hpp"

namespace csds {

// Named trainable tensors in registration order. Names are dotted paths
// whose first component is the parameter group ("encoder", "vae", ...).
class ParameterSet {
 public:
  Var add(const std::string& name, Tensor init);
  const Var& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return vars_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Var>& vars() const { return vars_; }
  std::vector<Var> group(const std::string& prefix) const;
  std::size_t scalar_count() const;

  void zero_grad();

 private:
  std::vector<std::string> names_;
  std::vector<Var> vars_;
  std::map<std::string, std::size_t> index_;
};

// y = x W + b, with W stored in x out orientation.
struct Linear {
  Var weight;
  Var bias;

  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
         Rng& rng);
  Var operator()(const Var& x) const { return add_bias(matmul(x, weight), bias); }
};

}  // namespace csds

#endif  // CSDS_NN_HPP_
