#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "reprbench/probe.hpp"

namespace reprbench {

namespace {

struct unit_rows {
  matrix_d rows;
  std::size_t zeros = 0;
};

// L2-normalised copies of the non-zero rows.
unit_rows normalise(const matrix_f &m) {
  unit_rows out{matrix_d(0, m.cols()), 0};
  std::vector<double> buf(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double norm = 0.0;
    for (const float v : row) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      ++out.zeros;
      continue;
    }
    for (std::size_t j = 0; j < row.size(); ++j) buf[j] = row[j] / norm;
    out.rows.append_row(buf);
  }
  return out;
}

}  // namespace

std::vector<alignment_record> alignment_similarity(
    const std::map<std::uint32_t, matrix_f> &speech,
    const std::map<std::uint32_t, matrix_f> &text) {
  if (speech.empty()) {
    throw argument_error("alignment: no layers given");
  }
  for (const auto &[layer, _] : speech) {
    if (!text.contains(layer)) {
      throw argument_error("alignment: layer " + std::to_string(layer) +
                           " has speech states but no text states");
    }
  }
  for (const auto &[layer, _] : text) {
    if (!speech.contains(layer)) {
      throw argument_error("alignment: layer " + std::to_string(layer) +
                           " has text states but no speech states");
    }
  }

  std::vector<alignment_record> out;
  for (const auto &[layer, s] : speech) {
    const auto &t = text.at(layer);
    if (s.cols() != t.cols()) {
      throw argument_error("alignment: layer " + std::to_string(layer) +
                           " speech width " + std::to_string(s.cols()) +
                           " differs from text width " + std::to_string(t.cols()));
    }
    const auto su = normalise(s);
    const auto tu = normalise(t);
    if (su.rows.rows() == 0 || tu.rows.rows() == 0) {
      throw argument_error("alignment: layer " + std::to_string(layer) +
                           " has no non-zero vectors on one side");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < su.rows.rows(); ++i) {
      const auto a = su.rows.row(i);
      double best = -1.0;
      for (std::size_t j = 0; j < tu.rows.rows(); ++j) {
        const auto b = tu.rows.row(j);
        double dot = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
        best = std::max(best, dot);
      }
      sum += std::clamp(best, -1.0, 1.0);
    }
    out.push_back({layer, sum / static_cast<double>(su.rows.rows()), su.rows.rows(),
                   su.zeros + tu.zeros});
  }
  return out;
}

std::string format_alignment(const std::vector<alignment_record> &records) {
  std::string out = "layer\tsimilarity\tspeech_vectors\texcluded_zero\n";
  for (const auto &r : records) {
    out += std::to_string(r.layer_id) + "\t" + detail::format_double(r.similarity) +
           "\t" + std::to_string(r.speech_vectors) + "\t" +
           std::to_string(r.excluded_zero) + "\n";
  }
  return out;
}

}  // namespace reprbench
