#pragma once

#include <stdexcept>
#include <string>

namespace letc {

// Factorization failed beyond the jitter ladder: the system is not identifiable.
struct SingularSystem : std::runtime_error {
    explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

// |x'beta| below the slope tolerance: the revenue parabola is flat.
struct DegenerateSlope : std::runtime_error {
    explicit DegenerateSlope(const std::string& what) : std::runtime_error(what) {}
};

// The critical inequality has no crossing below the bracket cap.
struct NoBracket : std::runtime_error {
    explicit NoBracket(const std::string& what) : std::runtime_error(what) {}
};

// Semi-synthetic feature generation exhausted its tries for a product.
struct Discarded : std::runtime_error {
    explicit Discarded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace letc
