#pragma once

// File formats.
//
//   basis JSON        {"M":..,"K":..,"D":..,"blocks":[[[re,im],...],...]}
//                     one array of K*D pairs per block, row-major
//   signal CSV        header "re,im", then one sample per row
//   observation CSV   first row "L,M" (the two integers), then L rows of
//                     re_1,im_1,...,re_M,im_M
//   matrix CSV        first row "rows,cols" (integers), then one matrix row
//                     per line with interleaved re,im entries

#include <filesystem>
#include <string>

#include "blindmc/model.hpp"

namespace blindmc::io {

std::string basis_to_json(const BilinearBasis& basis);
BilinearBasis basis_from_json(const std::string& text);

std::string signal_to_csv(const Eigen::Ref<const Eigen::VectorXcd>& v);
Eigen::VectorXcd signal_from_csv(const std::string& text);

std::string observations_to_csv(const ObservationSet& obs);
ObservationSet observations_from_csv(const std::string& text);

std::string matrix_to_csv(const Eigen::Ref<const Eigen::MatrixXcd>& m);
Eigen::MatrixXcd matrix_from_csv(const std::string& text);

/// Whole file contents; throws InputError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace blindmc::io
