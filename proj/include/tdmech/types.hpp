#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tdmech {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point (t, x, y) of R x TM in chart coordinates; evaluation site for all
/// coefficient fields.
struct TangentSample {
    double t = 0.0;
    Vec x, y;

    std::vector<double> flat() const {
        std::vector<double> out;
        out.reserve(1 + x.size() + y.size());
        out.push_back(t);
        out.insert(out.end(), x.data(), x.data() + x.size());
        out.insert(out.end(), y.data(), y.data() + y.size());
        return out;
    }
};

/// A tangent vector (s, z, w) to R x TM at some TangentSample.
struct TangentVec {
    double s = 0.0;
    Vec z, w;
};

/// Raw second-order jet (t, x, y, z): position, first and second chart
/// derivatives of a representative curve. Raw jets carry no linear structure.
struct Jet2 {
    double t = 0.0;
    Vec x, y, z;
};

/// Image of a Jet2 under a second-order trivialization; the last slot is
/// w = z + G(t,x,y) (spray form) or w = z + N0 + N1*y (connection form).
struct Trivialized {
    double t = 0.0;
    Vec x, y, w;
};

enum class Provenance {
    canonical_from_lagrangian,
    lagrangian_vector_field,
    forced,
    constrained,
    user,
};

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::canonical_from_lagrangian: return "canonical-from-L";
        case Provenance::lagrangian_vector_field: return "lagrangian-vector-field";
        case Provenance::forced: return "forced";
        case Provenance::constrained: return "constrained";
        case Provenance::user: return "user";
    }
    return "?";
}

}  // namespace tdmech
