// Copyright 2026 The gridcorr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "gridcorr/pde_systems.hpp"

/// JSON forms of the physical specifications.
namespace gridcorr {

void to_json(nlohmann::json& j, const SystemSpec& s);
/// Missing fields take the defaults of the named kind; unknown keys throw ConfigError.
void from_json(const nlohmann::json& j, SystemSpec& s);

void to_json(nlohmann::json& j, const ForcingSpec& f);
/// Either a preset {"family": "f1"} or {"family": "custom", ...}.
void from_json(const nlohmann::json& j, ForcingSpec& f);

/// Throws ConfigError naming the first key of `j` outside `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where);

/// 16 hex digits of the FNV-1a hash of `text`.
std::string fnv1a_hex(const std::string& text);

}  // namespace gridcorr
