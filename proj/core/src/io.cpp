#include "spca/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <tuple>

#include "spca/error.hpp"

static_assert(std::endian::native == std::endian::little, "binary codecs assume a little-endian host");

namespace spca {
namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    out_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void magic(const char* m) { out_.append(m, 4); }
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const char* what) : bytes_(bytes), what_(what) {}
  template <class T>
  T get() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  void raw(void* p, std::size_t n) {
    if (n > bytes_.size() - pos_) throw IoError(std::string(what_) + " file is truncated");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  void magic(const char* m) {
    char got[4];
    raw(got, 4);
    if (std::memcmp(got, m, 4) != 0) throw IoError(std::string("not a ") + what_ + " file (bad magic)");
    const auto version = get<std::uint32_t>();
    if (version != kVersion) throw IoError(std::string("unsupported ") + what_ + " version " + std::to_string(version));
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void finish() const {
    if (remaining() != 0) throw IoError(std::string(what_) + " file has trailing bytes");
  }
  // Guards allocations driven by header counts.
  void need(std::size_t count, std::size_t unit) const {
    if (unit != 0 && count > remaining() / unit) throw IoError(std::string(what_) + " file is truncated");
  }

 private:
  const std::string& bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

std::string encode_basis(const PswfBasis& basis) {
  Writer w;
  w.magic("PSWB");
  w.put(kVersion);
  const auto& p = basis.params();
  w.put(static_cast<std::uint32_t>(p.L));
  w.put(p.c);
  w.put(p.T);
  w.put(p.eps_nystrom);
  w.put(p.theta_q);
  w.put(basis.hash());
  w.put(static_cast<std::uint64_t>(basis.size()));
  for (const auto& e : basis.eigenpairs()) {
    w.put(static_cast<std::int32_t>(e.N));
    w.put(static_cast<std::uint32_t>(e.n));
    w.put(e.beta);
    w.put(e.alpha.real());
    w.put(e.alpha.imag());
    const auto& nodes = e.grid->nodes();
    w.put(static_cast<std::uint32_t>(nodes.size()));
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      w.put(nodes[j]);
      w.put(e.values[j]);
    }
  }
  return w.take();
}

PswfBasis decode_basis(const std::string& bytes) {
  Reader r(bytes, "basis");
  r.magic("PSWB");
  BandParams p;
  p.L = static_cast<int>(r.get<std::uint32_t>());
  p.c = r.get<double>();
  p.T = r.get<double>();
  p.eps_nystrom = r.get<double>();
  p.theta_q = r.get<double>();
  const auto hash = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  r.need(count, 32);
  std::vector<RadialEigenpair> pairs;
  pairs.reserve(count);
  std::shared_ptr<const RadialGrid> grid;
  for (std::uint64_t i = 0; i < count; ++i) {
    RadialEigenpair e;
    e.N = r.get<std::int32_t>();
    e.n = static_cast<int>(r.get<std::uint32_t>());
    e.beta = r.get<double>();
    const double are = r.get<double>();
    const double aim = r.get<double>();
    e.alpha = {are, aim};
    e.lambda = (p.c / (2.0 * std::numbers::pi)) * e.alpha;
    const auto samples = r.get<std::uint32_t>();
    r.need(samples, 16);
    if (!grid) grid = std::make_shared<RadialGrid>(static_cast<int>(samples));
    if (static_cast<int>(samples) != grid->size()) throw IoError("basis file mixes radial grids");
    e.values.resize(samples);
    for (std::uint32_t j = 0; j < samples; ++j) {
      const double node = r.get<double>();
      if (node != grid->nodes()[j]) throw IoError("basis file radial grid does not match the Gauss-Legendre nodes");
      e.values[j] = r.get<double>();
    }
    e.grid = grid;
    pairs.push_back(std::move(e));
  }
  r.finish();
  if (pairs.empty()) throw IoError("basis file holds no functions");
  PswfBasis basis(p, std::move(pairs));
  if (basis.hash() != hash) throw IoError("basis file hash mismatch (corrupt file)");
  return basis;
}

void save_basis(const std::filesystem::path& path, const PswfBasis& basis) {
  write_file_atomic(path, encode_basis(basis));
}
PswfBasis load_basis(const std::filesystem::path& path) { return decode_basis(read_file(path)); }

std::string encode_rule(const QuadratureRule& rule) {
  Writer w;
  w.magic("PSWQ");
  w.put(kVersion);
  w.put(rule.basis_hash);
  w.put(rule.bandlimit);
  w.put(rule.theta_q);
  w.put(static_cast<std::uint32_t>(rule.rings()));
  for (std::size_t l = 0; l < rule.rings(); ++l) {
    w.put(rule.radial_nodes[l]);
    w.put(rule.radial_weights[l]);
    w.put(static_cast<std::uint32_t>(rule.angular_counts[l]));
  }
  return w.take();
}

QuadratureRule decode_rule(const std::string& bytes) {
  Reader r(bytes, "quadrature rule");
  r.magic("PSWQ");
  QuadratureRule rule;
  rule.basis_hash = r.get<std::uint64_t>();
  rule.bandlimit = r.get<double>();
  rule.theta_q = r.get<double>();
  const auto rings = r.get<std::uint32_t>();
  r.need(rings, 20);
  for (std::uint32_t l = 0; l < rings; ++l) {
    rule.radial_nodes.push_back(r.get<double>());
    rule.radial_weights.push_back(r.get<double>());
    const auto nt = r.get<std::uint32_t>();
    if (nt == 0) throw IoError("quadrature rule has an empty ring");
    rule.angular_counts.push_back(static_cast<int>(nt));
  }
  r.finish();
  return rule;
}

void save_rule(const std::filesystem::path& path, const QuadratureRule& rule) {
  write_file_atomic(path, encode_rule(rule));
}
QuadratureRule load_rule(const std::filesystem::path& path) { return decode_rule(read_file(path)); }

std::string encode_stack(const ImageStack& stack) {
  stack.validate();
  Writer w;
  w.magic("SPCI");
  w.put(kVersion);
  w.put(static_cast<std::uint32_t>(stack.count));
  w.put(static_cast<std::uint32_t>(stack.side));
  w.put(static_cast<std::uint32_t>(stack.side));
  w.raw(stack.pixels.data(), stack.pixels.size() * sizeof(double));
  if (!stack.provenance.empty()) {
    w.magic("PROV");
    w.put(static_cast<std::uint32_t>(stack.provenance.size()));
    w.raw(stack.provenance.data(), stack.provenance.size());
  }
  return w.take();
}

ImageStack decode_stack(const std::string& bytes) {
  Reader r(bytes, "image stack");
  r.magic("SPCI");
  ImageStack s;
  s.count = static_cast<int>(r.get<std::uint32_t>());
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  if (h != w) throw IoError("image stack must hold square images");
  s.side = static_cast<int>(h);
  const std::size_t n = static_cast<std::size_t>(s.count) * h * w;
  r.need(n, sizeof(double));
  s.pixels.resize(n);
  r.raw(s.pixels.data(), n * sizeof(double));
  if (r.remaining() > 0) {
    char tag[4];
    r.raw(tag, 4);
    if (std::memcmp(tag, "PROV", 4) != 0) throw IoError("image stack has an unknown trailer");
    const auto len = r.get<std::uint32_t>();
    r.need(len, 1);
    s.provenance.resize(len);
    r.raw(s.provenance.data(), len);
  }
  r.finish();
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid image stack: ") + e.what());
  }
  return s;
}

void save_stack(const std::filesystem::path& path, const ImageStack& stack) {
  write_file_atomic(path, encode_stack(stack));
}
ImageStack load_stack(const std::filesystem::path& path) { return decode_stack(read_file(path)); }

std::string encode_coefficients(const CoefficientSet& coeffs) {
  Writer w;
  w.magic("SPCC");
  w.put(kVersion);
  w.put(coeffs.basis_hash);
  w.put(static_cast<std::uint32_t>(coeffs.values.cols()));
  w.put(static_cast<std::uint32_t>(coeffs.indices.size()));
  w.put(static_cast<std::uint32_t>(coeffs.method));
  w.put(static_cast<std::uint32_t>(coeffs.side));
  w.put(coeffs.residual_bound);
  for (const auto& ix : coeffs.indices) {
    w.put(static_cast<std::int32_t>(ix.N));
    w.put(static_cast<std::uint32_t>(ix.n));
  }
  w.raw(coeffs.values.data(), static_cast<std::size_t>(coeffs.values.size()) * sizeof(std::complex<double>));
  return w.take();
}

CoefficientSet decode_coefficients(const std::string& bytes) {
  Reader r(bytes, "coefficient");
  r.magic("SPCC");
  CoefficientSet c;
  c.basis_hash = r.get<std::uint64_t>();
  const auto M = r.get<std::uint32_t>();
  const auto count = r.get<std::uint32_t>();
  const auto method = r.get<std::uint32_t>();
  if (method > 1) throw IoError("coefficient file has an unknown method tag");
  c.method = static_cast<ExpansionMethod>(method);
  c.side = static_cast<int>(r.get<std::uint32_t>());
  c.residual_bound = r.get<double>();
  r.need(count, 8);
  c.indices.resize(count);
  for (auto& ix : c.indices) {
    ix.N = r.get<std::int32_t>();
    ix.n = static_cast<int>(r.get<std::uint32_t>());
  }
  r.need(static_cast<std::size_t>(M) * count, sizeof(std::complex<double>));
  c.values.resize(count, M);
  r.raw(c.values.data(), static_cast<std::size_t>(c.values.size()) * sizeof(std::complex<double>));
  r.finish();
  return c;
}

void save_coefficients(const std::filesystem::path& path, const CoefficientSet& coeffs) {
  write_file_atomic(path, encode_coefficients(coeffs));
}
CoefficientSet load_coefficients(const std::filesystem::path& path) { return decode_coefficients(read_file(path)); }

std::string encode_model(const SpcaModel& model) {
  Writer w;
  w.magic("SPCM");
  w.put(kVersion);
  w.put(model.basis_hash);
  w.put(model.coeffs_hash);
  w.put(static_cast<std::uint32_t>(model.L));
  w.put(model.c);
  w.put(static_cast<std::uint32_t>(model.blocks.size()));
  for (std::size_t N = 0; N < model.blocks.size(); ++N) {
    const auto& b = model.blocks[N];
    const auto n = b.values.size();
    w.put(static_cast<std::int32_t>(b.N));
    w.put(static_cast<std::uint32_t>(n));
    w.put(static_cast<std::uint64_t>(model.offsets[N]));
    w.raw(b.values.data(), static_cast<std::size_t>(n) * sizeof(double));
    w.raw(b.vectors.data(), static_cast<std::size_t>(n * n) * sizeof(std::complex<double>));
    w.raw(model.weights.data() + model.offsets[N], static_cast<std::size_t>(n) * sizeof(double));
  }
  w.put(static_cast<std::uint32_t>(model.mean.size()));
  w.raw(model.mean.data(), static_cast<std::size_t>(model.mean.size()) * sizeof(std::complex<double>));
  return w.take();
}

SpcaModel decode_model(const std::string& bytes) {
  Reader r(bytes, "model");
  r.magic("SPCM");
  SpcaModel m;
  m.basis_hash = r.get<std::uint64_t>();
  m.coeffs_hash = r.get<std::uint64_t>();
  m.L = static_cast<int>(r.get<std::uint32_t>());
  m.c = r.get<double>();
  const auto blocks = r.get<std::uint32_t>();
  r.need(blocks, 16);
  std::vector<double> weights;
  for (std::uint32_t k = 0; k < blocks; ++k) {
    SpcaBlock b;
    b.N = r.get<std::int32_t>();
    if (b.N != static_cast<int>(k)) throw IoError("model blocks are out of order");
    const auto n = r.get<std::uint32_t>();
    const auto offset = r.get<std::uint64_t>();
    if (offset != weights.size()) throw IoError("model block offsets are inconsistent");
    r.need(static_cast<std::size_t>(n) * n, sizeof(std::complex<double>));
    b.values.resize(n);
    b.vectors.resize(n, n);
    r.raw(b.values.data(), static_cast<std::size_t>(n) * sizeof(double));
    r.raw(b.vectors.data(), static_cast<std::size_t>(n) * n * sizeof(std::complex<double>));
    const std::size_t first = weights.size();
    weights.resize(first + n);
    r.raw(weights.data() + first, static_cast<std::size_t>(n) * sizeof(double));
    m.offsets.push_back(offset);
    m.blocks.push_back(std::move(b));
  }
  const auto n0 = r.get<std::uint32_t>();
  r.need(n0, sizeof(std::complex<double>));
  m.mean.resize(n0);
  r.raw(m.mean.data(), static_cast<std::size_t>(n0) * sizeof(std::complex<double>));
  r.finish();
  m.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  m.rank();
  return m;
}

void save_model(const std::filesystem::path& path, const SpcaModel& model) {
  write_file_atomic(path, encode_model(model));
}
SpcaModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

std::string encode_projections(const ProjectionSet& proj) {
  std::ostringstream out;
  out << "m,k,re,im\n" << std::setprecision(17);
  for (Eigen::Index m = 0; m < proj.d.rows(); ++m) {
    for (Eigen::Index k = 0; k < proj.d.cols(); ++k) {
      out << m << ',' << k << ',' << proj.d(m, k).real() << ',' << proj.d(m, k).imag() << '\n';
    }
  }
  return out.str();
}

ProjectionSet decode_projections(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "m,k,re,im") throw IoError("projection CSV has an unexpected header");
  std::vector<std::tuple<long, long, double, double>> rows;
  long max_m = -1, max_k = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    long m, k;
    double re, im;
    char c1, c2, c3;
    std::istringstream ls(line);
    if (!(ls >> m >> c1 >> k >> c2 >> re >> c3 >> im) || c1 != ',' || c2 != ',' || c3 != ',' || m < 0 || k < 0) {
      throw IoError("malformed projection CSV row: " + line);
    }
    rows.emplace_back(m, k, re, im);
    max_m = std::max(max_m, m);
    max_k = std::max(max_k, k);
  }
  ProjectionSet p;
  p.K = static_cast<int>(max_k + 1);
  p.d = Eigen::MatrixXcd::Zero(max_m + 1, max_k + 1);
  for (const auto& [m, k, re, im] : rows) p.d(m, k) = {re, im};
  return p;
}

void save_projections(const std::filesystem::path& path, const ProjectionSet& proj) {
  write_file_atomic(path, encode_projections(proj));
}

}  // namespace spca
