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

#include "gridcorr/gct1.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gridcorr/error.hpp"

namespace gridcorr::gct1 {

static_assert(std::endian::native == std::endian::little, "GCT1 I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'G', 'C', 'T', '1'};
constexpr std::size_t kMaxDims = 16;

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
  public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string take(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

  private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw IoError("gct1: truncated file");
    }
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

std::size_t scalars_per_element(Code code) { return code == Code::Complex128 ? 2 : 1; }

}  // namespace

std::uint64_t Record::element_count() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::string encode(const Record& r) {
    if (r.dims.size() > kMaxDims) throw IoError("gct1: too many dimensions");
    if (r.values.size() != r.element_count() * scalars_per_element(r.code))
        throw IoError("gct1: payload length does not match dims");
    std::string out(kMagic, 4);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(r.code));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(r.dims.size()));
    for (auto d : r.dims) put<std::uint64_t>(out, d);
    if (r.code == Code::Float32) {
        for (double v : r.values) put<float>(out, static_cast<float>(v));
    } else {
        for (double v : r.values) put<double>(out, v);
    }
    const std::string meta = r.meta.dump();
    if (meta.size() > UINT32_MAX) throw IoError("gct1: metadata too large");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
    out += meta;
    return out;
}

Record decode(const std::string& bytes) {
    Reader in(bytes);
    if (in.take(4) != std::string(kMagic, 4)) throw IoError("gct1: bad magic");
    Record r;
    const auto code = in.get<std::uint8_t>();
    if (code > 2) throw IoError("gct1: unknown dtype code " + std::to_string(code));
    r.code = static_cast<Code>(code);
    const auto ndim = in.get<std::uint8_t>();
    if (ndim > kMaxDims) throw IoError("gct1: too many dimensions");
    for (std::size_t i = 0; i < ndim; ++i) r.dims.push_back(in.get<std::uint64_t>());
    const std::uint64_t n = r.element_count() * scalars_per_element(r.code);
    const std::size_t width = r.code == Code::Float32 ? 4 : 8;
    if (n > bytes.size() / width) throw IoError("gct1: payload larger than file");
    r.values.resize(n);
    for (auto& v : r.values) v = r.code == Code::Float32 ? static_cast<double>(in.get<float>()) : in.get<double>();
    const auto len = in.get<std::uint32_t>();
    try {
        r.meta = nlohmann::json::parse(in.take(len));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("gct1: malformed metadata: ") + e.what());
    }
    if (!in.done()) throw IoError("gct1: trailing bytes after metadata");
    return r;
}

void write(const std::string& path, const Record& record) {
    const std::string bytes = encode(record);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

Record read(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
        return decode(ss.str());
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

}  // namespace gridcorr::gct1
