#pragma once

// Text formats.
//   Hypergraph: header "d n m", then m lines of d space-separated 1-based vertices,
//               sorted within each line and lexicographically across lines.
//   Assignment: one line of n space-separated +1/-1 values.
//   Matrix:     integer CSV, one row per line, no header.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hsbm/error.hpp"
#include "hsbm/model.hpp"
#include "hsbm/similarity.hpp"

namespace hsbm {

inline void write_hypergraph(std::ostream& out, const Hypergraph& g) {
  out << g.uniformity() << ' ' << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    const auto e = g.edge(k);
    for (std::size_t a = 0; a < e.size(); ++a) out << (a ? " " : "") << e[a] + 1;
    out << '\n';
  }
}

inline Hypergraph read_hypergraph(std::istream& in) {
  std::size_t d = 0, n = 0, m = 0;
  if (!(in >> d >> n >> m)) throw FormatError("hypergraph header must be 'd n m'");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    Edge e(d);
    for (std::size_t a = 0; a < d; ++a) {
      long long v = 0;
      if (!(in >> v)) throw FormatError("hypergraph truncated at edge " + std::to_string(k + 1));
      if (v < 1 || static_cast<unsigned long long>(v) > n) throw FormatError("vertex index out of range");
      e[a] = static_cast<Vertex>(v - 1);
    }
    edges.push_back(std::move(e));
  }
  std::string rest;
  if (in >> rest) throw FormatError("unexpected trailing content in hypergraph");
  try {
    return Hypergraph(n, d, std::move(edges));
  } catch (const ParameterError& err) {
    throw FormatError(std::string("invalid hypergraph: ") + err.what());
  }
}

inline void write_assignment(std::ostream& out, const CommunityAssignment& sigma) {
  for (std::size_t i = 0; i < sigma.size(); ++i) out << (i ? " " : "") << (sigma[i] > 0 ? "1" : "-1");
  out << '\n';
}

inline CommunityAssignment read_assignment(std::istream& in) {
  std::vector<int> labels;
  std::string token;
  while (in >> token) {
    if (token == "1" || token == "+1")
      labels.push_back(1);
    else if (token == "-1")
      labels.push_back(-1);
    else
      throw FormatError("assignment entries must be +1 or -1, got '" + token + "'");
  }
  if (labels.empty()) throw FormatError("empty assignment");
  return CommunityAssignment(std::move(labels));
}

inline void write_matrix_csv(std::ostream& out, const SimilarityMatrix& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto row = w.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
}

inline SimilarityMatrix read_matrix_csv(std::istream& in) {
  std::vector<std::int64_t> values;
  std::size_t cols = 0, rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stoll(cell, &used));
        while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\t')) ++used;
        if (used != cell.size()) throw FormatError("non-integer matrix entry '" + cell + "'");
      } catch (const std::logic_error&) {
        throw FormatError("non-integer matrix entry '" + cell + "'");
      }
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw FormatError("ragged matrix row " + std::to_string(rows + 1));
    ++rows;
  }
  if (rows != cols) throw FormatError("matrix must be square");
  try {
    return SimilarityMatrix(rows, std::move(values));
  } catch (const ParameterError& err) {
    throw FormatError(std::string("invalid similarity matrix: ") + err.what());
  }
}

template <typename T, typename Reader>
T read_file(const std::string& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return reader(in);
}

}  // namespace hsbm
