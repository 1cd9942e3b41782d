#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coprime/combining.hpp"
#include "coprime/errors.hpp"

namespace coprime {

namespace {

std::string format_complex(cplx z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

cplx parse_complex(const std::string& token) {
  if (token.size() < 2 || token.back() != 'j') {
    throw InvalidArgument("combiner entry '" + token + "' is not of the form re+imj");
  }
  // The imaginary part starts at the last sign that is not an exponent sign.
  std::size_t split = std::string::npos;
  for (std::size_t k = token.size() - 1; k > 0; --k) {
    if ((token[k] == '+' || token[k] == '-') && token[k - 1] != 'e' && token[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) {
    throw InvalidArgument("combiner entry '" + token + "' has no imaginary part");
  }
  const std::string re_s = token.substr(0, split);
  const std::string im_s = token.substr(split, token.size() - split - 1);
  char* end = nullptr;
  const double re = std::strtod(re_s.c_str(), &end);
  if (end != re_s.c_str() + re_s.size()) throw InvalidArgument("bad real part in '" + token + "'");
  const double im = std::strtod(im_s.c_str(), &end);
  if (end != im_s.c_str() + im_s.size()) throw InvalidArgument("bad imaginary part in '" + token + "'");
  return {re, im};
}

}  // namespace

void write_combiner(std::ostream& os, const Combiner& E) {
  os << "# kind: " << to_string(E.kind) << '\n';
  os << "# rows: " << E.matrix.rows() << " cols: " << E.matrix.cols() << '\n';
  for (Eigen::Index r = 0; r < E.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < E.matrix.cols(); ++c) {
      if (c > 0) os << ' ';
      os << format_complex(E.matrix(r, c));
    }
    os << '\n';
  }
}

Combiner read_combiner(std::istream& is) {
  Combiner E;
  E.kind = CombinerKind::Mmse;
  std::vector<std::vector<cplx>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("kind:");
      if (pos != std::string::npos) {
        std::istringstream ks(line.substr(pos + 5));
        std::string kind;
        ks >> kind;
        E.kind = combiner_kind_from_string(kind);
      }
      continue;
    }
    std::istringstream ls(line);
    std::vector<cplx> row;
    std::string token;
    while (ls >> token) row.push_back(parse_complex(token));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidArgument("combiner row " + std::to_string(rows.size() + 1) + " has " +
                            std::to_string(row.size()) + " entries, expected " +
                            std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw InvalidArgument("combiner file holds no matrix");
  E.matrix.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      E.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  if (E.kind == CombinerKind::Selection) {
    for (Eigen::Index c = 0; c < E.matrix.cols(); ++c) {
      Eigen::Index j = 0;
      E.matrix.col(c).cwiseAbs().maxCoeff(&j);
      E.picked.push_back(static_cast<int>(j));
    }
  }
  return E;
}

}  // namespace coprime
