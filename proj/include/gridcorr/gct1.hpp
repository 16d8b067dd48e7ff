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

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

/// GCT1 tensor container.
///
/// Layout: "GCT1", u8 dtype code, u8 ndim, ndim x u64 dims, row-major payload,
/// u32 length + UTF-8 JSON metadata. Integers and floats are little-endian.
namespace gridcorr::gct1 {

enum class Code : std::uint8_t { Float32 = 0, Float64 = 1, Complex128 = 2 };

struct Record {
    Code code = Code::Float64;
    std::vector<std::uint64_t> dims;
    /// Payload as doubles; complex entries are interleaved (re, im).
    std::vector<double> values;
    nlohmann::json meta = nlohmann::json::object();

    std::uint64_t element_count() const;
};

std::string encode(const Record& record);
Record decode(const std::string& bytes);

void write(const std::string& path, const Record& record);
Record read(const std::string& path);

}  // namespace gridcorr::gct1
