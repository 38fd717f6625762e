#pragma once

#include <array>
#include <string>

namespace pcad {

enum class DefectKind { none, convex, concave, scratch, scar, deformation };

inline constexpr std::array<DefectKind, 5> kAllDefectKinds = {
    DefectKind::convex, DefectKind::concave, DefectKind::scratch, DefectKind::scar, DefectKind::deformation};

std::string to_string(DefectKind kind);
DefectKind parse_defect_kind(const std::string& text);

}  // namespace pcad
