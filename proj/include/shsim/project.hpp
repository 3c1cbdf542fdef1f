#pragma once

#include <vector>

#include "shsim/model.hpp"
#include "shsim/schedule.hpp"
#include "shsim/time.hpp"

namespace shsim {

// A complete simulation setup: the house, its task/scenario definitions, and
// the wall-clock instant mapped to virtual time 0.
struct Project {
  WallTime epoch{};
  House house;
  Schedule schedule;

  bool operator==(const Project&) const = default;
};

/// House, schedule and id-alphabet checks combined; empty when valid.
std::vector<Violation> validate_project(const Project& project);

}  // namespace shsim
