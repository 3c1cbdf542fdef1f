#include "shsim/project.hpp"

namespace shsim {

std::vector<Violation> validate_project(const Project& project) {
  auto out = validate_house(project.house);
  auto more = validate_schedule(project.house, project.schedule);
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

}  // namespace shsim
