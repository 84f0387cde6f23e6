#include "smiley/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "smiley/error.hpp"
#include "smiley/text.hpp"

namespace smiley {
namespace {

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> column_of(const Tensor& m, std::size_t c) {
  std::vector<double> out(m.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.at(i, c);
  return out;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "spearman: length mismatch");
  if (x.size() < 3) throw Error(ErrorCode::InvalidArgument, "spearman needs at least 3 points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) throw Error(ErrorCode::NumericError, "spearman: NaN input");
  }
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::vector<std::optional<double>> correlate_dimensions(const Tensor& probs, std::span<const std::uint8_t> labels) {
  if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
    throw Error(ErrorCode::ShapeError, "correlate_dimensions: rows do not match labels");
  }
  const auto positives = std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; });
  if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
    throw Error(ErrorCode::DegenerateClass, "correlate_dimensions needs both label values");
  }
  std::vector<double> y(labels.begin(), labels.end());
  std::vector<std::optional<double>> out;
  out.reserve(probs.dim(1));
  for (std::size_t c = 0; c < probs.dim(1); ++c) out.push_back(spearman(column_of(probs, c), y));
  return out;
}

std::vector<std::optional<double>> FingerprintMatrix::column(std::size_t e) const {
  std::vector<std::optional<double>> out(categories);
  for (std::size_t c = 0; c < categories; ++c) out[c] = at(c, e);
  return out;
}

std::optional<std::size_t> FingerprintMatrix::argmax_emotion(std::size_t c) const {
  std::optional<std::size_t> best;
  for (std::size_t e = 0; e < emotions(); ++e) {
    const auto& v = at(c, e);
    if (v && (!best || *v > *at(c, *best))) best = e;
  }
  return best;
}

FingerprintMatrix fingerprint(const Tensor& probs, std::span<const int> emotion_labels,
                              std::vector<std::string> emotion_names) {
  const std::size_t e_count = emotion_names.size();
  if (probs.rank() != 2 || probs.dim(0) != emotion_labels.size()) {
    throw Error(ErrorCode::ShapeError, "fingerprint: rows do not match labels");
  }
  std::vector<std::size_t> per_class(e_count, 0);
  for (int e : emotion_labels) {
    if (e < 0 || static_cast<std::size_t>(e) >= e_count) {
      throw Error(ErrorCode::LabelError, "emotion label " + std::to_string(e) + " out of range");
    }
    ++per_class[e];
  }
  for (std::size_t e = 0; e < e_count; ++e) {
    if (per_class[e] < 3) {
      throw Error(ErrorCode::DegenerateClass, "emotion '" + emotion_names[e] + "' has fewer than 3 samples");
    }
    if (per_class[e] == emotion_labels.size()) {
      throw Error(ErrorCode::DegenerateClass, "emotion '" + emotion_names[e] + "' covers every sample");
    }
  }
  FingerprintMatrix f;
  f.categories = probs.dim(1);
  f.emotion_names = std::move(emotion_names);
  f.values.assign(f.categories * e_count, std::nullopt);
  std::vector<std::uint8_t> one_vs_rest(emotion_labels.size());
  for (std::size_t e = 0; e < e_count; ++e) {
    for (std::size_t i = 0; i < emotion_labels.size(); ++i) one_vs_rest[i] = emotion_labels[i] == static_cast<int>(e);
    auto rho = correlate_dimensions(probs, one_vs_rest);
    for (std::size_t c = 0; c < f.categories; ++c) f.values[c * e_count + e] = rho[c];
  }
  return f;
}

std::vector<RankedEntry> rank_top(std::span<const std::optional<double>> values, std::size_t n) {
  std::vector<RankedEntry> entries;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) entries.push_back({static_cast<int>(i), *values[i]});
  }
  n = std::min(n, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n), entries.end(),
                    [](const RankedEntry& a, const RankedEntry& b) {
                      if (a.value != b.value) return a.value > b.value;
                      return a.id < b.id;
                    });
  entries.resize(n);
  return entries;
}

std::vector<RankedEntry> rank_top(std::span<const double> values, std::size_t n) {
  std::vector<std::optional<double>> wrapped(values.begin(), values.end());
  return rank_top(std::span<const std::optional<double>>(wrapped), n);
}

ProjectionResult project_2d(const Tensor& embeddings, std::span<const int> labels) {
  if (embeddings.rank() != 2 || embeddings.dim(0) != labels.size()) {
    throw Error(ErrorCode::ShapeError, "project_2d: rows do not match labels");
  }
  if (embeddings.dim(0) < 3) throw Error(ErrorCode::InvalidArgument, "project_2d needs at least 3 points");
  ProjectionResult r;
  const Matrix x = Matrix::from_tensor(embeddings);
  r.pca = pca(x, 2);
  r.coords = r.pca.project(x);
  r.labels.assign(labels.begin(), labels.end());
  return r;
}

std::string fingerprint_csv(const FingerprintMatrix& f, const EmojiTaxonomy& tax) {
  if (f.categories != tax.size()) throw Error(ErrorCode::ShapeError, "fingerprint rows differ from taxonomy size");
  std::string out = "category";
  for (const auto& name : f.emotion_names) out += "," + csv_escape(name);
  out += "\n";
  for (std::size_t c = 0; c < f.categories; ++c) {
    out += csv_escape(tax[c].name);
    for (std::size_t e = 0; e < f.emotions(); ++e) {
      const auto& v = f.at(c, e);
      out += "," + (v ? format_double(*v) : std::string("NA"));
    }
    out += "\n";
  }
  return out;
}

std::string projection_csv(const ProjectionResult& p, std::span<const std::string> sample_ids) {
  if (sample_ids.size() != p.coords.rows) throw Error(ErrorCode::ShapeError, "projection_csv: id count mismatch");
  std::string out = "sid,x,y,label\n";
  for (std::size_t i = 0; i < p.coords.rows; ++i) {
    out += csv_escape(sample_ids[i]) + "," + format_double(p.coords(i, 0)) + "," + format_double(p.coords(i, 1)) +
           "," + std::to_string(p.labels[i]) + "\n";
  }
  return out;
}

std::string projection_svg(const ProjectionResult& p, std::span<const std::string> label_names) {
  static constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                             "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double kSize = 800.0, kMargin = 40.0;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  for (std::size_t i = 0; i < p.coords.rows; ++i) {
    const double x = p.coords(i, 0), y = p.coords(i, 1);
    if (i == 0 || x < xmin) xmin = x;
    if (i == 0 || x > xmax) xmax = x;
    if (i == 0 || y < ymin) ymin = y;
    if (i == 0 || y > ymax) ymax = y;
  }
  const double xspan = xmax > xmin ? xmax - xmin : 1.0;
  const double yspan = ymax > ymin ? ymax - ymin : 1.0;
  auto sx = [&](double x) { return kMargin + (x - xmin) / xspan * (kSize - 2 * kMargin); };
  auto sy = [&](double y) { return kSize - kMargin - (y - ymin) / yspan * (kSize - 2 * kMargin); };

  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\" width=\"800\" height=\"800\">\n"
      "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  char buf[256];
  for (std::size_t i = 0; i < p.coords.rows; ++i) {
    const int label = p.labels[i];
    const char* color = kPalette[static_cast<std::size_t>(std::max(label, 0)) % std::size(kPalette)];
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\" fill-opacity=\"0.7\"/>\n",
                  sx(p.coords(i, 0)), sy(p.coords(i, 1)), color);
    out += buf;
  }
  for (std::size_t l = 0; l < label_names.size(); ++l) {
    std::snprintf(buf, sizeof buf, "<rect x=\"10\" y=\"%zu\" width=\"10\" height=\"10\" fill=\"%s\"/>\n", 10 + 16 * l,
                  kPalette[l % std::size(kPalette)]);
    out += buf;
    std::string name;
    for (char ch : label_names[l]) {
      if (ch == '<') name += "&lt;";
      else if (ch == '>') name += "&gt;";
      else if (ch == '&') name += "&amp;";
      else name.push_back(ch);
    }
    std::snprintf(buf, sizeof buf, "<text x=\"26\" y=\"%zu\" font-size=\"12\" font-family=\"sans-serif\">", 19 + 16 * l);
    out += buf + name + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace smiley
