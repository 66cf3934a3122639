#pragma once

#include "cavelast/degree.hpp"
#include "cavelast/inverse.hpp"
#include "cavelast/variation.hpp"

#include <map>
#include <string>

namespace cavelast {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Flat "key = value" record, one entry per line, keys sorted.
using Summary = std::map<std::string, std::string>;
std::string format_summary(const Summary& s);
Summary parse_summary(const std::string& text);

// Columns: iter,energy,bulk,surface,min_det,step,residual.
std::string iterations_csv(const std::vector<IterationRecord>& log);

// Columns: vertex,x1,x2,y1,y2.
std::string deformation_csv(const DeformationField& y);
DeformationField parse_deformation_csv(const std::string& text, std::shared_ptr<const Mesh> mesh);

// Columns: cavity,point,x,y; points in counterclockwise order.
std::string cavities_csv(const std::vector<Polyline>& cavities);
std::vector<Polyline> parse_cavities_csv(const std::string& text);

// Plain PGM (P2) with pixel value clamp(deg + offset, 0, 2 offset); the top
// image row is the largest y.
std::string degree_pgm(const DegreeRaster& r, int offset = 8);

// Columns: i,j,xi1,xi2,kind,x1,x2.
std::string inverse_csv(const InverseField& f);
// Columns: curve,point,x,y,n1,n2,amplitude.
std::string jump_set_csv(const std::vector<JumpCurve>& curves);

/// SVG with the reference mesh on the left and the deformed mesh on the
/// right, cavity boundaries drawn in red. Built only from mesh.cavmesh,
/// deformation.csv and cavities.csv in `dir`.
std::string render_svg_from_exports(const std::string& dir);

} // namespace cavelast
