#pragma once

#include <string>

namespace vassforge {

enum class Verdict { Verified, Falsified, Inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Verified: return "verified";
    case Verdict::Falsified: return "falsified";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

// Falsified dominates Inconclusive, which dominates Verified.
inline Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::Falsified || b == Verdict::Falsified) return Verdict::Falsified;
    if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
    return Verdict::Verified;
}

inline int exit_code(Verdict v) {
    switch (v) {
    case Verdict::Verified: return 0;
    case Verdict::Falsified: return 1;
    case Verdict::Inconclusive: return 2;
    }
    return 2;
}

}  // namespace vassforge
