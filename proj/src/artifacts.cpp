#include "schreg/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace schreg {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw_config("cannot write " + path.string());
  return out;
}

json complex_json(Complex v) { return json::array({v.real(), v.imag()}); }

Complex complex_from(const json& v) { return Complex(v[0].get<double>(), v[1].get<double>()); }

json profile_json(const ComplexProfile& p) {
  json arr = json::array();
  for (const Complex& v : p.values) arr.push_back(complex_json(v));
  return arr;
}

ComplexProfile profile_from(const json& arr, const SpatialGrid& grid) {
  if (static_cast<int>(arr.size()) != grid.size())
    throw_config("gains file: profile length does not match the grid");
  ComplexProfile p(grid);
  for (int i = 0; i < grid.size(); ++i) p[i] = complex_from(arr[static_cast<size_t>(i)]);
  return p;
}

json cvector_json(const Eigen::VectorXcd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(complex_json(v(i)));
  return arr;
}

Eigen::VectorXcd cvector_from(const json& arr) {
  Eigen::VectorXcd v(static_cast<int>(arr.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = complex_from(arr[static_cast<size_t>(i)]);
  return v;
}

json kernel_json(const KernelGrid& k) {
  const int n = k.grid().n_cells;
  json vals = json::array();
  for (int i = 0; i <= n; ++i) {
    const int jlo = k.orientation() == Orientation::lower ? 0 : i;
    const int jhi = k.orientation() == Orientation::lower ? i : n;
    for (int j = jlo; j <= jhi; ++j) vals.push_back(complex_json(k(i, j)));
  }
  return json{{"orientation", k.orientation() == Orientation::lower ? "lower" : "upper"},
              {"values", vals}};
}

KernelGrid kernel_from(const json& obj, const SpatialGrid& grid) {
  const Orientation o =
      obj.at("orientation").get<std::string>() == "lower" ? Orientation::lower : Orientation::upper;
  KernelGrid k(grid, o);
  const json& vals = obj.at("values");
  size_t at = 0;
  const int n = grid.n_cells;
  for (int i = 0; i <= n; ++i) {
    const int jlo = o == Orientation::lower ? 0 : i;
    const int jhi = o == Orientation::lower ? i : n;
    for (int j = jlo; j <= jhi; ++j) k(i, j) = complex_from(vals.at(at++));
  }
  if (at != vals.size()) throw_config("gains file: kernel value count mismatch");
  return k;
}

}  // namespace

void write_timeseries_csv(const TimeSeries& ts, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "t";
  for (const std::string& n : ts.names) out << "," << n;
  for (const std::string& n : ts.cnames) out << ",re_" << n << ",im_" << n;
  out << "\n";
  for (size_t s = 0; s < ts.times.size(); ++s) {
    out << num(ts.times[s]);
    for (const auto& col : ts.data) out << "," << num(col[s]);
    for (const auto& col : ts.cdata) out << "," << num(col[s].real()) << "," << num(col[s].imag());
    out << "\n";
  }
}

void write_snapshot_channels_csv(const TimeSeries& ts, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "t";
  for (const std::string& n : ts.snap_names) out << "," << n;
  out << "\n";
  for (size_t s = 0; s < ts.snapshot_times.size(); ++s) {
    out << num(ts.snapshot_times[s]);
    for (const auto& col : ts.snap_data) out << "," << num(col[s]);
    out << "\n";
  }
}

void write_profile_csv(const ComplexProfile& profile, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "x,re,im\n";
  for (int i = 0; i < profile.size(); ++i)
    out << num(profile.grid.node(i)) << "," << num(profile[i].real()) << ","
        << num(profile[i].imag()) << "\n";
}

void write_kernel_csv(const KernelGrid& kernel, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "x,xi,re,im\n";
  const int n = kernel.grid().n_cells;
  for (int i = 0; i <= n; ++i) {
    const int jlo = kernel.orientation() == Orientation::lower ? 0 : i;
    const int jhi = kernel.orientation() == Orientation::lower ? i : n;
    for (int j = jlo; j <= jhi; ++j)
      out << num(kernel.grid().node(i)) << "," << num(kernel.grid().node(j)) << ","
          << num(kernel(i, j).real()) << "," << num(kernel(i, j).imag()) << "\n";
  }
}

void write_spectrum_csv(const AsymptoticsReport& rep, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "n,re_lambda,im_lambda,re_mu,im_mu,residual,deviation\n";
  for (const AsymptoticsRow& r : rep.rows)
    out << r.n << "," << num(r.lambda.real()) << "," << num(r.lambda.imag()) << ","
        << num(r.mu.real()) << "," << num(r.mu.imag()) << "," << num(r.residual) << ","
        << num(r.deviation) << "\n";
}

void write_properness_csv(const PropernessProbe& probe, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "s,magnitude,bound\n";
  for (size_t i = 0; i < probe.s_values.size(); ++i)
    out << num(probe.s_values[i]) << "," << num(probe.magnitudes[i]) << ","
        << num(probe.bounds[i]) << "\n";
}

void save_gains_json(const GainSet& gains, const std::filesystem::path& path) {
  const SpatialGrid grid = gains.kernels.control.grid();
  json doc;
  doc["grid"] = {{"n_cells", grid.n_cells}};
  doc["c_s"] = gains.kernels.c_s;
  doc["c_o"] = gains.kernels.c_o;
  doc["kernels"] = {{"control", kernel_json(gains.kernels.control)},
                    {"control_reciprocal", kernel_json(gains.kernels.control_reciprocal)},
                    {"observer", kernel_json(gains.kernels.observer)},
                    {"observer_reciprocal", kernel_json(gains.kernels.observer_reciprocal)}};
  json m = json::array(), mxx = json::array(), n = json::array(), nxx = json::array();
  for (const auto& p : gains.m) m.push_back(profile_json(p));
  for (const auto& p : gains.m_xx) mxx.push_back(profile_json(p));
  for (const auto& p : gains.n) n.push_back(profile_json(p));
  for (const auto& p : gains.n_xx) nxx.push_back(profile_json(p));
  doc["m"] = m;
  doc["m_xx"] = mxx;
  doc["n"] = n;
  doc["n_xx"] = nxx;
  doc["m_x0"] = cvector_json(gains.m_x0);
  doc["m_x1"] = cvector_json(gains.m_x1);
  doc["m_w"] = cvector_json(gains.m_w);
  doc["n_x0"] = cvector_json(gains.n_x0);
  doc["n_x1"] = cvector_json(gains.n_x1);
  doc["n_at_1"] = cvector_json(gains.n_at_1.transpose());
  doc["l_profile"] = profile_json(gains.l_profile);
  doc["l0"] = complex_json(gains.l0);
  doc["l_d"] = cvector_json(gains.l_d);
  json lr = json::array();
  for (int i = 0; i < gains.l_r.size(); ++i) lr.push_back(gains.l_r(i));
  doc["l_r"] = lr;
  doc["feedback"] = {{"k11", complex_json(gains.feedback.k11)},
                     {"kx1", profile_json(gains.feedback.kx1)}};
  json ar = json::array();
  for (int r = 0; r < gains.A_r.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < gains.A_r.cols(); ++c) row.push_back(gains.A_r(r, c));
    ar.push_back(row);
  }
  doc["A_r"] = ar;
  json ad = json::array();
  for (int r = 0; r < gains.A_d.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < gains.A_d.cols(); ++c) row.push_back(complex_json(gains.A_d(r, c)));
    ad.push_back(row);
  }
  doc["A_d"] = ad;

  std::ofstream out = open_out(path);
  out << doc.dump(1) << "\n";
}

GainSet load_gains_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_config("cannot open gains file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw_config(std::string("gains file is not valid JSON: ") + e.what());
  }
  const SpatialGrid grid(doc.at("grid").at("n_cells").get<int>());
  GainSet gs;
  gs.kernels.c_s = doc.at("c_s").get<double>();
  gs.kernels.c_o = doc.at("c_o").get<double>();
  gs.kernels.control = kernel_from(doc.at("kernels").at("control"), grid);
  gs.kernels.control_reciprocal = kernel_from(doc.at("kernels").at("control_reciprocal"), grid);
  gs.kernels.observer = kernel_from(doc.at("kernels").at("observer"), grid);
  gs.kernels.observer_reciprocal = kernel_from(doc.at("kernels").at("observer_reciprocal"), grid);
  for (const json& p : doc.at("m")) gs.m.push_back(profile_from(p, grid));
  for (const json& p : doc.at("m_xx")) gs.m_xx.push_back(profile_from(p, grid));
  for (const json& p : doc.at("n")) gs.n.push_back(profile_from(p, grid));
  for (const json& p : doc.at("n_xx")) gs.n_xx.push_back(profile_from(p, grid));
  gs.m_x0 = cvector_from(doc.at("m_x0"));
  gs.m_x1 = cvector_from(doc.at("m_x1"));
  gs.m_w = cvector_from(doc.at("m_w"));
  gs.n_x0 = cvector_from(doc.at("n_x0"));
  gs.n_x1 = cvector_from(doc.at("n_x1"));
  gs.n_at_1 = cvector_from(doc.at("n_at_1")).transpose();
  gs.l_profile = profile_from(doc.at("l_profile"), grid);
  gs.l0 = complex_from(doc.at("l0"));
  gs.l_d = cvector_from(doc.at("l_d"));
  const json& lr = doc.at("l_r");
  gs.l_r.resize(static_cast<int>(lr.size()));
  for (int i = 0; i < gs.l_r.size(); ++i) gs.l_r(i) = lr.at(static_cast<size_t>(i)).get<double>();
  gs.feedback.k11 = complex_from(doc.at("feedback").at("k11"));
  gs.feedback.kx1 = profile_from(doc.at("feedback").at("kx1"), grid);
  const json& ar = doc.at("A_r");
  gs.A_r.resize(static_cast<int>(ar.size()), static_cast<int>(ar.size()));
  for (int r = 0; r < gs.A_r.rows(); ++r)
    for (int c = 0; c < gs.A_r.cols(); ++c)
      gs.A_r(r, c) = ar.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>();
  const json& ad = doc.at("A_d");
  gs.A_d.resize(static_cast<int>(ad.size()), static_cast<int>(ad.size()));
  for (int r = 0; r < gs.A_d.rows(); ++r)
    for (int c = 0; c < gs.A_d.cols(); ++c)
      gs.A_d(r, c) = complex_from(ad.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)));
  return gs;
}

namespace {

struct PlotBounds {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};

const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace

void emit_plot(const TimeSeries& ts, const std::vector<std::string>& columns,
               const std::filesystem::path& path, bool log_y) {
  const double W = 840, H = 520, L = 70, R = 20, T = 30, B = 45;

  std::vector<const std::vector<double>*> cols;
  for (const std::string& name : columns) cols.push_back(&ts.values(name));

  PlotBounds bd;
  bool have_data = !ts.times.empty() && !cols.empty();
  if (have_data) {
    bd.xmin = ts.times.front();
    bd.xmax = ts.times.back();
    bd.ymin = 1e300;
    bd.ymax = -1e300;
    for (const auto* col : cols)
      for (double v : *col) {
        const double y = log_y ? std::log10(std::max(v, 1e-16)) : v;
        bd.ymin = std::min(bd.ymin, y);
        bd.ymax = std::max(bd.ymax, y);
      }
    if (bd.xmax <= bd.xmin) bd.xmax = bd.xmin + 1.0;
    if (bd.ymax <= bd.ymin) bd.ymax = bd.ymin + 1.0;
    const double pad = 0.05 * (bd.ymax - bd.ymin);
    bd.ymin -= pad;
    bd.ymax += pad;
  }

  auto px = [&](double t) { return L + (t - bd.xmin) / (bd.xmax - bd.xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - bd.ymin) / (bd.ymax - bd.ymin) * (H - T - B); };

  std::ofstream out = open_out(path);
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"840\" height=\"520\" "
         "viewBox=\"0 0 840 520\">\n";
  out << "<rect width=\"840\" height=\"520\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                L, T, W - L - R, H - T - B);
  out << buf;

  // ticks and grid
  for (int k = 0; k <= 5; ++k) {
    const double fx = bd.xmin + k * (bd.xmax - bd.xmin) / 5.0;
    const double fy = bd.ymin + k * (bd.ymax - bd.ymin) / 5.0;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#dddddd\"/>\n",
                  px(fx), T, px(fx), H - B);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#dddddd\"/>\n",
                  L, py(fy), W - R, py(fy));
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
                  "text-anchor=\"middle\">%.4g</text>\n",
                  px(fx), H - B + 16.0, fx);
    out << buf;
    const double label = log_y ? std::pow(10.0, fy) : fy;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
                  "text-anchor=\"end\">%.3g</text>\n",
                  L - 6.0, py(fy) + 4.0, label);
    out << buf;
  }

  if (have_data) {
    const size_t npts = ts.times.size();
    const size_t stride = std::max<size_t>(1, npts / 2000);
    for (size_t c = 0; c < cols.size(); ++c) {
      out << "<polyline fill=\"none\" stroke=\"" << kPalette[c % 6] << "\" stroke-width=\"1.2\" points=\"";
      for (size_t s = 0; s < npts; s += stride) {
        const double v = (*cols[c])[s];
        const double y = log_y ? std::log10(std::max(v, 1e-16)) : v;
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(ts.times[s]), py(y));
        out << buf;
      }
      // always include the final sample
      const double vlast = (*cols[c]).back();
      const double ylast = log_y ? std::log10(std::max(vlast, 1e-16)) : vlast;
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f", px(ts.times.back()), py(ylast));
      out << buf << "\"/>\n";
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"12\" "
                    "fill=\"%s\">%s</text>\n",
                    L + 10.0, T + 16.0 + 14.0 * c, kPalette[c % 6], columns[c].c_str());
      out << buf;
    }
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
                "text-anchor=\"middle\">t</text>\n",
                (L + W - R) / 2.0, H - 10.0);
  out << buf;
  out << "</svg>\n";
}

}  // namespace schreg
