#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "piv/diagnostics.hpp"

namespace piv::csv {

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_spectrum(const diag::SpectrumResult& s, std::ostream& os) {
  os << "k,E\n";
  for (std::size_t i = 0; i < s.k.size(); ++i)
    os << s.k[i] << ',' << detail::num(s.energy[i]) << '\n';
}

inline void write_structure(const diag::StructureFnResult& s, std::ostream& os) {
  os << "n,r,S\n";
  for (std::size_t oi = 0; oi < s.orders.size(); ++oi)
    for (std::size_t ri = 0; ri < s.radii.size(); ++ri)
      os << s.orders[oi] << ',' << detail::num(s.radii[ri]) << ','
         << detail::num(s.moments(static_cast<int>(oi), static_cast<int>(ri))) << '\n';
}

inline void write_histogram(const diag::Histogram& h, std::ostream& os) {
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << detail::num(h.edges[i]) << ',' << detail::num(h.edges[i + 1]) << ',' << h.counts[i]
       << '\n';
}

/// Nonzero cells of the joint (P, Q) histogram.
inline void write_joint_histogram(const diag::InvariantResult& inv, std::ostream& os) {
  os << "p_lo,p_hi,q_lo,q_hi,count\n";
  const auto np = static_cast<int>(inv.joint_counts.rows());
  const auto nq = static_cast<int>(inv.joint_counts.cols());
  for (int pi = 0; pi < np; ++pi)
    for (int qi = 0; qi < nq; ++qi) {
      const std::int64_t count = inv.joint_counts(pi, qi);
      if (count == 0) continue;
      const std::size_t pe = inv.p_edges.size() > 2 ? static_cast<std::size_t>(pi) : 0;
      const std::size_t qe = inv.q_edges.size() > 2 ? static_cast<std::size_t>(qi) : 0;
      os << detail::num(inv.p_edges[pe]) << ',' << detail::num(inv.p_edges[pe + 1]) << ','
         << detail::num(inv.q_edges[qe]) << ',' << detail::num(inv.q_edges[qe + 1]) << ','
         << count << '\n';
    }
}

inline void write_flux(const diag::FluxResult& f, std::ostream& os) {
  os << "r,flux\n";
  for (std::size_t i = 0; i < f.radii.size(); ++i)
    os << detail::num(f.radii[i]) << ',' << detail::num(f.flux[i]) << '\n';
}

inline void write_divergence_summary(double rms_div, double rms_grad, std::ostream& os) {
  os << "rms_div,rms_grad,div_grad_ratio\n";
  const double ratio = rms_grad > 0.0 ? rms_div / rms_grad : 0.0;
  os << detail::num(rms_div) << ',' << detail::num(rms_grad) << ',' << detail::num(ratio) << '\n';
}

}  // namespace piv::csv
