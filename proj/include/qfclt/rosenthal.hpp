#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfclt/innovations.hpp"
#include "qfclt/lattice.hpp"
#include "qfclt/orlicz.hpp"

namespace qfclt {

/// Ortho-martingale difference generators: i.i.d. d_u = xi_u, or the
/// product d_u = eta^(1)_{u_1} ... eta^(d)_{u_d} of independent
/// one-dimensional i.i.d. sequences.
enum class DiffField { Iid, Product };

std::string to_string(DiffField f);
DiffField diff_field_from_string(const std::string& s);

struct RosenthalConstants {
  double c1 = 0.0;  // 12 (log 2)^{1-d}
  double c2 = 0.0;  // 2 * 3^{(d+5)/2}
};

RosenthalConstants rosenthal_constants(int d);

/// C1 max(f_d(varphi_d^{-1}(C2 m)), phi_d(C2 m)); the first branch is dropped
/// (and phi_only set) when f_d is not monotone.
double rosenthal_rhs(int d, double m_norm, bool* phi_only = nullptr);

struct RosenthalReport {
  int d = 0;
  Rect n;
  InnovationSpec spec;
  DiffField field = DiffField::Iid;
  int trials = 0;
  double lhs = 0.0;             // sum_u E Phi_d(|d_u|)
  bool lhs_exact = false;
  double lhs_std_error = 0.0;
  NormEstimate m_norm;          // ||M_n||_Phi_d
  double m_norm_upper = 0.0;    // value + 2.326 stderr (one-sided 99%)
  double rhs = 0.0;             // at m_norm_upper
  RosenthalConstants constants;
  bool phi_branch_only = false;
  bool verdict = false;         // lhs <= rhs
  double slack_ratio = 0.0;     // lhs / rhs
  std::vector<std::string> flags;
};

/// trials >= 1000 (domain_error otherwise).
RosenthalReport rosenthal_check(int d, const InnovationSpec& spec, const Rect& n, int trials,
                                DiffField field = DiffField::Iid, std::uint64_t seed = 0x0520'5e1dULL);

std::vector<RosenthalReport> rosenthal_sweep(int d, const InnovationSpec& spec, const std::vector<Rect>& n_list,
                                             int trials, DiffField field = DiffField::Iid,
                                             std::uint64_t seed = 0x0520'5e1dULL);

}  // namespace qfclt
