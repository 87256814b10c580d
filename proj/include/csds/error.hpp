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
#ifndef CSDS_ERROR_HPP_
#define CSDS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace csds {

// Every failure raised by the library derives from Error. The C API maps the
// subclasses onto status codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not satisfy an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input data or configuration violates a documented invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures and malformed binary files.
class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace csds

#endif  // CSDS_ERROR_HPP_
