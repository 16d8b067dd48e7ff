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

#include "gridcorr/serialize.hpp"

#include <cstdio>

namespace gridcorr {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed) ok = ok || item.key() == key;
        if (!ok) throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
    }
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

}  // namespace

void to_json(json& j, const SystemSpec& s) {
    j = json{{"kind", to_string(s.kind)}, {"length", s.length}};
    switch (s.kind) {
        case SystemKind::Burgers: j["nu"] = s.nu; break;
        case SystemKind::GrayScott:
            j["du"] = s.du;
            j["dv"] = s.dv;
            j["feed"] = s.feed;
            j["kill"] = s.kill;
            break;
        case SystemKind::FitzHughNagumo:
            j["gamma"] = s.gamma;
            j["alpha"] = s.alpha;
            j["beta"] = s.beta;
            break;
        case SystemKind::NavierStokes: j["re"] = s.re; break;
    }
}

void from_json(const json& j, SystemSpec& s) {
    const std::string where = "system";
    reject_unknown_keys(j, {"kind", "length", "nu", "du", "dv", "feed", "kill", "gamma", "alpha", "beta", "re"}, where);
    if (!j.contains("kind")) throw ConfigError("system.kind is required");
    try {
        s = SystemSpec::defaults(parse_system_kind(j.at("kind").get<std::string>()));
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("system.kind: ") + e.what());
    } catch (const json::exception&) {
        throw ConfigError("system.kind: wrong type");
    }
    read_opt(j, "length", s.length, where);
    read_opt(j, "nu", s.nu, where);
    read_opt(j, "du", s.du, where);
    read_opt(j, "dv", s.dv, where);
    read_opt(j, "feed", s.feed, where);
    read_opt(j, "kill", s.kill, where);
    read_opt(j, "gamma", s.gamma, where);
    read_opt(j, "alpha", s.alpha, where);
    read_opt(j, "beta", s.beta, where);
    read_opt(j, "re", s.re, where);
    try {
        s.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
}

void to_json(json& j, const ForcingSpec& f) {
    j = json{{"family", f.family_name()}};
    if (f.family == ForcingSpec::Family::Custom) {
        j["amplitude"] = f.amplitude;
        j["wavenumber"] = f.wavenumber;
        j["trig"] = f.trig == ForcingSpec::Trig::Sin ? "sin" : "cos";
        j["axis"] = f.axis == ForcingSpec::Axis::Y ? "y" : "x";
        j["drag"] = f.drag;
    }
}

void from_json(const json& j, ForcingSpec& f) {
    const std::string where = "forcing";
    reject_unknown_keys(j, {"family", "amplitude", "wavenumber", "trig", "axis", "drag"}, where);
    std::string family = "f6";
    read_opt(j, "family", family, where);
    ForcingSpec::Family fam;
    try {
        fam = parse_forcing_family(family);
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("forcing.family: ") + e.what());
    }
    if (fam != ForcingSpec::Family::Custom) {
        if (j.size() > 1) throw ConfigError("forcing: presets take no extra fields");
        f = ForcingSpec::preset(static_cast<int>(fam) + 1);
        return;
    }
    f = ForcingSpec::kolmogorov();
    std::string trig = "sin", axis = "y";
    read_opt(j, "amplitude", f.amplitude, where);
    read_opt(j, "wavenumber", f.wavenumber, where);
    read_opt(j, "drag", f.drag, where);
    read_opt(j, "trig", trig, where);
    read_opt(j, "axis", axis, where);
    if (trig != "sin" && trig != "cos") throw ConfigError("forcing.trig must be sin or cos");
    if (axis != "x" && axis != "y") throw ConfigError("forcing.axis must be x or y");
    f.trig = trig == "sin" ? ForcingSpec::Trig::Sin : ForcingSpec::Trig::Cos;
    f.axis = axis == "y" ? ForcingSpec::Axis::Y : ForcingSpec::Axis::X;
}

}  // namespace gridcorr
