#pragma once

#include "cavelast/deformation.hpp"
#include "cavelast/polygon.hpp"

#include <functional>
#include <optional>

namespace cavelast {

struct InversePoint {
    enum class Kind { reference, marker, outside };
    Kind kind = Kind::outside;
    Vec2 x = Vec2::Zero(); // pre-image, or the marker
    int triangle = -1;
};

// Fixed point outside the closed reference domain:
// centroid + 3 diam (1, 0).
Vec2 default_marker(const Mesh& mesh);

/// Point location on the deformed triangles of an admissible y. Points in no
/// deformed triangle but of nonzero outer-boundary degree are cavity points
/// and map to the marker.
class InverseMap {
public:
    explicit InverseMap(const DeformationField& y, std::optional<Vec2> marker = std::nullopt);

    InversePoint invert(const Vec2& xi) const;
    // Inverse of the element gradient at the pre-image; DomainError in a
    // cavity, where the inverse has no absolutely continuous part.
    Mat2 gradient(const Vec2& xi) const;

    const Vec2& marker() const { return marker_; }
    const DeformationField& deformation() const { return y_; }

private:
    DeformationField y_;
    Vec2 marker_;
    TriangleLocator locator_;
    std::vector<Polyline> outer_;
};

InversePoint invert_point(const DeformationField& y, const Vec2& xi);
Mat2 inverse_gradient(const DeformationField& y, const Vec2& xi);

/// Inverse sampled at cell centers of a grid over the deformed configuration.
struct InverseField {
    Grid grid;
    std::vector<InversePoint::Kind> kind;
    std::vector<Vec2> values;
    std::vector<int> triangle;
    Vec2 marker = Vec2::Zero();
};

InverseField build_inverse_field(const DeformationField& y, double delta, std::optional<Vec2> marker = std::nullopt);

/// One contour of the marker/non-marker boundary, counterclockwise around
/// the cavity. Segment i joins points[i] and points[i + 1]; its normal points
/// out of the cavity and its amplitude is |x - o| for the adjacent
/// non-marker pre-image x.
struct JumpCurve {
    Polyline points;
    std::vector<Vec2> normals;
    std::vector<double> amplitude;
};

std::vector<JumpCurve> extract_jump_set(const InverseField& inv);

struct AreaFormulaReport {
    double image_side = 0.0;     // raster sum of f(det D(inverse)) over non-marker cells
    double reference_side = 0.0; // integral of f(1/det Dy) det Dy over the mesh
    double relative_gap = 0.0;
};

AreaFormulaReport area_formula_check(const DeformationField& y, const std::function<double(double)>& f,
                                     double delta);

} // namespace cavelast
