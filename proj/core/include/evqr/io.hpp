#ifndef EVQR_IO_HPP
#define EVQR_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include "evqr/gaussian.hpp"
#include "evqr/measures.hpp"
#include "evqr/solver.hpp"

namespace evqr {

// CSV layouts (comma separators, '.' decimal, no locale):
//   mu file: header "w,u1,...,u{d_y}", one atom per row
//   nu file: header "w,x1,...,x{d_x},y1,...,y{d_y}", one atom per row
// Dimensions are inferred from the header. Values are written with 17
// significant digits so that matrices round-trip exactly.

DiscreteMeasure load_mu_csv(const std::string& path);
// Returns the measure and the inferred d_x.
std::pair<DiscreteMeasure, int> load_nu_csv(const std::string& path);

void write_mu_csv(const std::string& path, const DiscreteMeasure& mu);
void write_nu_csv(const std::string& path, const DiscreteMeasure& nu,
                  int dim_x);

// Dense coupling: row = mu-atom index, one column per nu-atom, no header.
void write_coupling_csv(const std::string& path, const Matrix& pi);
Matrix load_coupling_csv(const std::string& path);

// Potentials as two CSVs: f and g per mu-atom, h per nu-atom.
void write_potentials_csv(const std::string& fg_path,
                          const std::string& h_path, const Potentials& pots);

// Structured text model: {"m_y": [...], "sigma_xx": [[...]],
// "sigma_xy": [[...]], "sigma_yy": [[...]]} with row-major nested arrays.
GaussianModel load_gaussian_model(const std::string& path);
void write_gaussian_model(const std::string& path, const GaussianModel& model);

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows);

// %.17g, round-trip exact for IEEE doubles.
std::string format_double(double v);

} // namespace evqr

#endif // EVQR_IO_HPP
