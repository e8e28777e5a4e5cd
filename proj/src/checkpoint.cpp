// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/checkpoint.hpp"

#include <fstream>

#include "pinpoint/errors.hpp"

namespace pinpoint {

using nlohmann::json;

json tensor_to_json(const Tensor& t) {
    return json{{"shape", t.shape()}, {"data", t.values()}};
}

Tensor tensor_from_json(const json& j) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
        throw ParseError("tensor entry needs 'shape' and 'data'");
    }
    try {
        return Tensor(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad tensor entry: ") + e.what());
    } catch (const DimensionError& e) {
        throw ParseError(std::string("bad tensor entry: ") + e.what());
    }
}

json checkpoint_to_json(const Checkpoint& checkpoint) {
    json params = json::object();
    for (const auto& [name, tensor] : checkpoint.params) {
        params[name] = tensor_to_json(tensor);
    }
    return json{{"format", "pinpoint-checkpoint"},
                {"version", kCheckpointVersion},
                {"meta", checkpoint.meta},
                {"params", std::move(params)}};
}

Checkpoint checkpoint_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "pinpoint-checkpoint") {
        throw ParseError("not a pinpoint checkpoint");
    }
    if (doc.value("version", 0) != kCheckpointVersion) {
        throw ParseError("unsupported checkpoint version " + doc.value("version", json()).dump());
    }
    Checkpoint out;
    out.meta = doc.value("meta", json::object());
    for (const auto& [name, entry] : doc.at("params").items()) {
        out.params.emplace(name, tensor_from_json(entry));
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write checkpoint " + path.string());
    }
    os << checkpoint_to_json(checkpoint).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw ParseError("cannot read checkpoint " + path.string());
    }
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return checkpoint_from_json(doc);
}

}  // namespace pinpoint
