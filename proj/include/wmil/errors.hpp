/*
 * Copyright 2026 The wmil Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WMIL_ERRORS_HPP_
#define WMIL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace wmil {

// Precondition violations throw std::invalid_argument. The two types below
// separate bad input data from numerical breakdown so that the CLI can map
// them onto distinct exit codes.

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace wmil

#endif  // WMIL_ERRORS_HPP_
