#include <cmath>
#include <istream>
#include <ostream>

#include "outbreak/io.hpp"
#include "outbreak/neuralnet.hpp"

namespace outbreak {

namespace {

constexpr std::string_view kMagic = "OUTBREAKNET v1 sizes=";
constexpr std::string_view kScalerTag = "SCALER fields=";
constexpr std::string_view kTargetTag = "TARGET ";

template <typename Range>
void write_row(std::ostream& out, const Range& values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ' ';
    out << io::format_g17(v);
    first = false;
  }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    if (!io::read_line(in_, line)) fail("unexpected end of file");
    ++line_;
    return line;
  }

  std::vector<double> numbers(std::string_view text, std::size_t expected) {
    std::vector<double> out;
    for (auto f : io::split(text, ' ')) {
      if (f.empty()) continue;
      auto v = io::parse_double(f);
      if (!v || !std::isfinite(*v)) fail("bad number '" + std::string(f) + "'");
      out.push_back(*v);
    }
    if (out.size() != expected) {
      fail("expected " + std::to_string(expected) + " values, found " + std::to_string(out.size()));
    }
    return out;
  }

  void expect_end() {
    std::string line;
    while (io::read_line(in_, line)) {
      ++line_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) fail("trailing content after target range");
    }
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(Errc::BadCheckpoint, "line " + std::to_string(line_) + ": " + why);
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Network& net, const ScalerParams& scaler) {
  const auto sizes = net.layer_sizes();
  out << kMagic;
  for (std::size_t i = 0; i < sizes.size(); ++i) out << (i ? "," : "") << sizes[i];
  out << '\n';
  for (const auto& layer : net.layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      std::vector<double> row(layer.weights.row(r).begin(), layer.weights.row(r).end());
      write_row(out, row);
    }
    write_row(out, std::vector<double>(layer.bias.begin(), layer.bias.end()));
  }
  out << kScalerTag << scaler.fields.size() << '\n';
  for (const auto& f : scaler.fields) write_row(out, std::vector<double>{f.min, f.max});
  out << kTargetTag << io::format_g17(scaler.target_min) << ' ' << io::format_g17(scaler.target_max) << '\n';
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader reader(in);
  const std::string header = reader.next();
  if (!header.starts_with(kMagic)) reader.fail("expected '" + std::string(kMagic) + "...'");

  std::vector<std::size_t> sizes;
  for (auto f : io::split(std::string_view(header).substr(kMagic.size()), ',')) {
    auto v = io::parse_int(f);
    if (!v || *v <= 0) reader.fail("bad layer size '" + std::string(f) + "'");
    sizes.push_back(static_cast<std::size_t>(*v));
  }
  if (sizes.size() < 2 || sizes.back() != 1) reader.fail("bad architecture");

  Checkpoint ckpt;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const auto in_dim = static_cast<Eigen::Index>(sizes[k]);
    const auto out_dim = static_cast<Eigen::Index>(sizes[k + 1]);
    DenseLayer layer;
    layer.weights.resize(out_dim, in_dim);
    for (Eigen::Index r = 0; r < out_dim; ++r) {
      auto row = reader.numbers(reader.next(), sizes[k]);
      for (Eigen::Index c = 0; c < in_dim; ++c) layer.weights(r, c) = row[static_cast<std::size_t>(c)];
    }
    auto bias = reader.numbers(reader.next(), sizes[k + 1]);
    layer.bias = Eigen::Map<Eigen::VectorXd>(bias.data(), out_dim);
    layer.activation = k + 2 == sizes.size() ? Activation::identity : Activation::relu;
    ckpt.net.layers.push_back(std::move(layer));
  }

  const std::string scaler_line = reader.next();
  if (!scaler_line.starts_with(kScalerTag)) reader.fail("expected '" + std::string(kScalerTag) + "<n>'");
  auto fields = io::parse_int(std::string_view(scaler_line).substr(kScalerTag.size()));
  if (!fields || *fields < 0) reader.fail("bad scaler field count");
  for (long long i = 0; i < *fields; ++i) {
    auto mm = reader.numbers(reader.next(), 2);
    if (mm[0] > mm[1]) reader.fail("scaler min exceeds max");
    ckpt.scaler.fields.push_back({mm[0], mm[1]});
  }
  const std::string target_line = reader.next();
  if (!target_line.starts_with(kTargetTag)) reader.fail("expected target range");
  auto t = reader.numbers(std::string_view(target_line).substr(kTargetTag.size()), 2);
  ckpt.scaler.target_min = t[0];
  ckpt.scaler.target_max = t[1];
  reader.expect_end();
  return ckpt;
}

}  // namespace outbreak
