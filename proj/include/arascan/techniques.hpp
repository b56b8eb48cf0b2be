#pragma once

#include <array>
#include <optional>
#include <string>

namespace arascan {

/// The five major categories.
enum class Category { AD, VED, AT, AH, RD };

/// VED splits into emulator detection and app-level virtualization detection.
enum class Subfamily { None, ED, ALVD };

/// The 32 technique subcategories, in fixed report order.
enum class Technique {
    // anti-debugging
    UTC, US, UTP, PPA, ADU, DDF, UBS, ADM,
    // virtual environment detection / emulator detection
    DI, CB, TM, HC, ERS, SI, CSBD, TBCBD, MVBD, UESB,
    // virtual environment detection / app-level virtualization detection
    FP, SU, PD, CIH,
    // anti-tampering
    SC, CIC, SA, IV,
    // anti-hooking
    XPOSED, FRIDA,
    // root detection
    CIP, CSCE, CBTSP, DP,
};

inline constexpr int kTechniqueCount = 32;
inline constexpr int kCategoryCount = 5;

inline constexpr std::array<Technique, kTechniqueCount> all_techniques = {
    Technique::UTC,  Technique::US,    Technique::UTP,  Technique::PPA,
    Technique::ADU,  Technique::DDF,   Technique::UBS,  Technique::ADM,
    Technique::DI,   Technique::CB,    Technique::TM,   Technique::HC,
    Technique::ERS,  Technique::SI,    Technique::CSBD, Technique::TBCBD,
    Technique::MVBD, Technique::UESB,  Technique::FP,   Technique::SU,
    Technique::PD,   Technique::CIH,   Technique::SC,   Technique::CIC,
    Technique::SA,   Technique::IV,    Technique::XPOSED, Technique::FRIDA,
    Technique::CIP,  Technique::CSCE,  Technique::CBTSP, Technique::DP,
};

inline constexpr std::array<Category, kCategoryCount> all_categories = {
    Category::AD, Category::VED, Category::AT, Category::AH, Category::RD,
};

inline std::string to_string(Technique t)
{
    static const char* names[] = {
        "UTC", "US", "UTP", "PPA", "ADU", "DDF", "UBS", "ADM",
        "DI", "CB", "TM", "HC", "ERS", "SI", "CSBD", "TBCBD",
        "MVBD", "UESB", "FP", "SU", "PD", "CIH", "SC", "CIC",
        "SA", "IV", "XPOSED", "FRIDA", "CIP", "CSCE", "CBTSP", "DP",
    };
    return names[static_cast<int>(t)];
}

inline std::string to_string(Category c)
{
    static const char* names[] = {"AD", "VED", "AT", "AH", "RD"};
    return names[static_cast<int>(c)];
}

inline std::string to_string(Subfamily s)
{
    switch (s) {
    case Subfamily::ED: return "ED";
    case Subfamily::ALVD: return "ALVD";
    default: return "";
    }
}

inline std::optional<Technique> parse_technique(const std::string& name)
{
    for (Technique t : all_techniques) {
        if (to_string(t) == name) {
            return t;
        }
    }
    return std::nullopt;
}

inline std::optional<Category> parse_category(const std::string& name)
{
    for (Category c : all_categories) {
        if (to_string(c) == name) {
            return c;
        }
    }
    return std::nullopt;
}

inline Category category_of(Technique t)
{
    int i = static_cast<int>(t);
    if (i <= static_cast<int>(Technique::ADM)) return Category::AD;
    if (i <= static_cast<int>(Technique::CIH)) return Category::VED;
    if (i <= static_cast<int>(Technique::IV)) return Category::AT;
    if (i <= static_cast<int>(Technique::FRIDA)) return Category::AH;
    return Category::RD;
}

inline Subfamily subfamily_of(Technique t)
{
    if (category_of(t) != Category::VED) {
        return Subfamily::None;
    }
    return static_cast<int>(t) <= static_cast<int>(Technique::UESB) ? Subfamily::ED
                                                                    : Subfamily::ALVD;
}

}  // namespace arascan
