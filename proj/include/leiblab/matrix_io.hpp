#pragma once

// JSON encoding of matrices: {"dim": d, "re": [[...]], "im": [[...]]}, rows
// outermost. Doubles are written in shortest round-trip form.

#include <fstream>
#include <string>

#include <json.hpp>

#include "leiblab/errors.hpp"
#include "leiblab/linalg.hpp"

namespace leiblab {

using Json = nlohmann::json;

inline Json matrix_to_json(const CMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ir = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ir.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  return Json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline CMatrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im"))
    throw MalformedInput("matrix: expected an object with fields dim, re, im");
  if (!j.at("dim").is_number_integer() || j.at("dim").get<long>() < 1)
    throw MalformedInput("matrix: dim must be a positive integer");
  const auto dim = j.at("dim").get<Eigen::Index>();
  const Json& re = j.at("re");
  const Json& im = j.at("im");
  auto check_rows = [dim](const Json& a, const char* name) {
    if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != dim)
      throw MalformedInput(std::string("matrix: field ") + name + " must have dim rows");
    for (const auto& row : a) {
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
        throw MalformedInput(std::string("matrix: every row of ") + name + " must have dim entries");
      for (const auto& x : row)
        if (!x.is_number()) throw MalformedInput(std::string("matrix: non-numeric entry in ") + name);
    }
  };
  check_rows(re, "re");
  check_rows(im, "im");
  CMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      m(r, c) = Complex(re[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>(),
                        im[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>());
  linalg::require_well_formed(m, "matrix");
  return m;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw MalformedInput(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw MalformedInput("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace leiblab
