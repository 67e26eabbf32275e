#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "wayfinder/environment.hpp"
#include "wayfinder/world.hpp"

namespace testutil {

inline const std::filesystem::path kWorlds = WAYFINDER_WORLDS_DIR;

inline std::shared_ptr<const wayfinder::WorldSpec> bundled(const std::string& name) {
  return std::make_shared<const wayfinder::WorldSpec>(wayfinder::load_world_file(kWorlds / (name + ".json")));
}

inline std::shared_ptr<const wayfinder::WorldSpec> inline_world(const std::string& doc) {
  return std::make_shared<const wayfinder::WorldSpec>(wayfinder::load_world(doc));
}

}  // namespace testutil
