// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "pinpoint/tensor.hpp"

namespace pinpoint {

/// Named parameter tensors plus free-form metadata. Serialized as
/// {"format":"pinpoint-checkpoint","version":1,"meta":{…},"params":{name:{"shape":[…],"data":[…]}}}.
/// float64 values survive a save/load cycle bit for bit.
struct Checkpoint {
    std::map<std::string, Tensor> params;
    nlohmann::json meta = nlohmann::json::object();
};

inline constexpr int kCheckpointVersion = 1;

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j);

}  // namespace pinpoint
