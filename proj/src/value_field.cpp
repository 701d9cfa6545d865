#include "dispatch/value_field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "dispatch/errors.hpp"

namespace dispatch {

namespace {
constexpr char kMagic[8] = {'C', 'A', 'S', 'D', 'I', 'S', 'V', 'F'};
}

std::vector<double> GradientPair::central() const {
  std::vector<double> c(minus.size());
  for (std::size_t d = 0; d < minus.size(); ++d) c[d] = 0.5 * (minus[d] + plus[d]);
  return c;
}

ValueField::ValueField(const Grid& grid) : grid_(grid) {
  u_.assign(static_cast<std::size_t>(grid_.time_levels()) * grid_.nodes(), 0.0);
}

void ValueField::check_x(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != grid_.dims())
    throw DomainError("value field: state dimension mismatch");
  for (int d = 0; d < grid_.dims(); ++d) {
    if (!(x[d] >= -1e-12 && x[d] <= 1.0 + 1e-12))
      throw DomainError("value field: state component " + std::to_string(d) +
                        " outside [0,1]: " + std::to_string(x[d]));
  }
}

double ValueField::value_at(int level, const std::vector<double>& x) const {
  check_x(x);
  const int D = grid_.dims();
  std::vector<int> base(D);
  std::vector<double> w(D);
  for (int d = 0; d < D; ++d) {
    double pos = std::clamp(x[d], 0.0, 1.0) * grid_.cells[d];
    int b = static_cast<int>(std::floor(pos));
    if (b >= grid_.cells[d]) b = grid_.cells[d] - 1;
    base[d] = b;
    w[d] = pos - b;
  }
  const double* U = level_data(level);
  double acc = 0.0;
  std::vector<int> idx(D);
  for (unsigned corner = 0; corner < (1u << D); ++corner) {
    double weight = 1.0;
    for (int d = 0; d < D; ++d) {
      bool hi = (corner >> d) & 1u;
      weight *= hi ? w[d] : 1.0 - w[d];
      idx[d] = base[d] + (hi ? 1 : 0);
    }
    if (weight == 0.0) continue;
    acc += weight * U[grid_.flat_index(idx)];
  }
  return acc;
}

GradientPair ValueField::gradient_at_level(int level, const std::vector<double>& x) const {
  check_x(x);
  const int D = grid_.dims();
  std::vector<int> base(D);
  std::vector<double> w(D);
  for (int d = 0; d < D; ++d) {
    double pos = std::clamp(x[d], 0.0, 1.0) * grid_.cells[d];
    int b = static_cast<int>(std::floor(pos));
    if (b >= grid_.cells[d]) b = grid_.cells[d] - 1;
    base[d] = b;
    w[d] = pos - b;
  }
  std::vector<std::size_t> stride(D, 1);
  for (int d = D - 2; d >= 0; --d)
    stride[d] = stride[d + 1] * (grid_.cells[d + 1] + 1);

  const double* U = level_data(level);
  GradientPair g;
  g.minus.assign(D, 0.0);
  g.plus.assign(D, 0.0);
  std::vector<int> idx(D);
  for (unsigned corner = 0; corner < (1u << D); ++corner) {
    double weight = 1.0;
    for (int d = 0; d < D; ++d) {
      bool hi = (corner >> d) & 1u;
      weight *= hi ? w[d] : 1.0 - w[d];
      idx[d] = base[d] + (hi ? 1 : 0);
    }
    if (weight == 0.0) continue;
    std::size_t node = grid_.flat_index(idx);
    for (int d = 0; d < D; ++d) {
      double dminus, dplus;
      bool has_lo = idx[d] > 0;
      bool has_hi = idx[d] < grid_.cells[d];
      double lo = has_lo ? (U[node] - U[node - stride[d]]) / grid_.dx[d] : 0.0;
      double hi = has_hi ? (U[node + stride[d]] - U[node]) / grid_.dx[d] : 0.0;
      if (has_lo && has_hi) {
        dminus = lo;
        dplus = hi;
      } else if (has_lo) {
        dminus = dplus = lo;  // top face: interior one-sided difference
      } else {
        dminus = dplus = hi;  // bottom face
      }
      g.minus[d] += weight * dminus;
      g.plus[d] += weight * dplus;
    }
  }
  return g;
}

GradientPair ValueField::gradient_at(double t, const std::vector<double>& x) const {
  if (t < -1e-9 || t > grid_.horizon + 1e-9)
    throw DomainError("value field: time outside [0,T]");
  int level = static_cast<int>(std::llround(t / grid_.dt));
  level = std::clamp(level, 0, grid_.time_levels() - 1);
  return gradient_at_level(level, x);
}

void ValueField::dump(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write value field: " + path);
  out.write(kMagic, 8);
  int32_t version = 1;
  int32_t dims = grid_.dims();
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&dims), 4);
  for (int d = 0; d < dims; ++d) {
    int32_t m = grid_.cells[d];
    out.write(reinterpret_cast<const char*>(&m), 4);
  }
  out.write(reinterpret_cast<const char*>(&grid_.dt), 8);
  out.write(reinterpret_cast<const char*>(&grid_.horizon), 8);
  out.write(reinterpret_cast<const char*>(u_.data()),
            static_cast<std::streamsize>(u_.size() * sizeof(double)));
  if (!out) throw IoError("short write on value field: " + path);
}

ValueField ValueField::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open value field: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("not a value-field dump: " + path);
  int32_t version = 0, dims = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&dims), 4);
  if (!in || version != 1 || dims < 1 || dims > 32)
    throw IoError("unsupported value-field dump: " + path);
  Grid g;
  g.cells.resize(dims);
  for (int d = 0; d < dims; ++d) {
    int32_t m = 0;
    in.read(reinterpret_cast<char*>(&m), 4);
    if (!in || m < 1) throw IoError("bad value-field header: " + path);
    g.cells[d] = m;
  }
  in.read(reinterpret_cast<char*>(&g.dt), 8);
  in.read(reinterpret_cast<char*>(&g.horizon), 8);
  if (!in) throw IoError("bad value-field header: " + path);
  g.dx.resize(dims);
  for (int d = 0; d < dims; ++d) g.dx[d] = 1.0 / g.cells[d];
  ValueField f(g);
  in.read(reinterpret_cast<char*>(f.u_.data()),
          static_cast<std::streamsize>(f.u_.size() * sizeof(double)));
  if (!in) throw IoError("truncated value field: " + path);
  return f;
}

bool ValueField::all_finite() const {
  for (double v : u_)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace dispatch
