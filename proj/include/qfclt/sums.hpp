#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qfclt/fields.hpp"

namespace qfclt {

enum class PathMode { Cubic, Rectangular };

std::string to_string(PathMode mode);
PathMode path_mode_from_string(const std::string& s);

using GridPoint = std::array<double, kMaxDim>;

/// Finite set of evaluation points t in [0,1]^d.
struct Grid {
  int d = 0;
  std::vector<GridPoint> points;

  /// levels^d in lexicographic order.
  static Grid product(int d, const std::vector<double>& levels);
  /// {0.25, 0.5, 0.75, 1}^d.
  static Grid standard(int d);
  /// Throws domain_error for points outside [0,1]^d.
  void validate() const;
  std::size_t size() const noexcept { return points.size(); }
};

/// floor(n_i t_i), guarded against t n landing a rounding error below an integer.
MultiIndex scaled_index(const Rect& n, const GridPoint& t);

struct PathSample {
  Grid grid;
  std::vector<double> values;       // S-bar_{[nt]} / normalization, grid order
  std::vector<double> uncentered;   // S_{[nt]} / normalization
  double terminal = 0.0;            // S-bar_n / normalization
  double terminal_uncentered = 0.0; // S_n / normalization
  Rect n;
  double normalization = 1.0;
  std::uint64_t trial_seed = 0;
};

/// Partial sums of one realization over every m in [0, n], built from
/// masked fields: E[S_m | F_{m^(mask)}] is the prefix sum of the field whose
/// innovations are zeroed wherever a masked coordinate is positive.
class CornerSums {
 public:
  /// Computes the masks listed; all 2^d when masks is empty.
  CornerSums(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx, const Rect& n,
             std::vector<CornerMask> masks = {});

  const Rect& extent() const noexcept { return n_; }
  /// E[S_m | F_{corner(m, mask)}]; the empty mask gives S_m. m in [0, n].
  double corner_sum(const MultiIndex& m, CornerMask mask) const;
  double partial(const MultiIndex& m) const { return corner_sum(m, CornerMask{}); }
  /// S-bar_m = S_m - R_m; needs all masks.
  double centered(const MultiIndex& m) const;

 private:
  std::size_t offset(const MultiIndex& m) const;

  Rect n_;
  std::vector<std::int64_t> masks_;  // bits -> slot, -1 if absent
  std::vector<std::vector<double>> prefix_;
};

/// Direct sum of field_eval over [1,n], compensated above 10^4 terms.
double partial_sum(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx, const Rect& n);

/// R_n: signed sum of cond_expect_sum over the nonempty corner masks.
double random_centering(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                        const Rect& n);

/// Normalized paths t -> S-bar_{[nt]}/sqrt|n| on the grid. Cubic mode needs n
/// square and normalizes by N^{d/2}.
PathSample centered_path(const FieldModel& model, const InnovationSpec& spec, const SeedContext& ctx,
                         const Rect& n, const Grid& grid, PathMode mode = PathMode::Rectangular);

/// Trial seed used by every Monte-Carlo loop over futures.
std::uint64_t trial_seed_for(std::uint64_t omega_seed, std::uint64_t n_index, std::uint64_t trial);

struct MeanEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

struct NegligibilityEstimate {
  Rect n;
  int coordinate = 1;          // one-based
  MeanEstimate estimate;       // E_0[max_m (E_{m^(i)} S_m)^2] / |n|
  bool dyadic_sublattice = false;
};

/// Monte-Carlo estimate with the past fixed by omega_seed and the future
/// resampled. The max runs over all m <= n, or over m with dyadic (or
/// terminal) coordinates once |n| > 10^4.
NegligibilityEstimate centering_negligibility(const FieldModel& model, const InnovationSpec& spec,
                                              std::uint64_t omega_seed, int coordinate, const Rect& n,
                                              int trials, std::uint64_t master_salt = 0);

std::vector<NegligibilityEstimate> negligibility_sweep(const FieldModel& model, const InnovationSpec& spec,
                                                       std::uint64_t omega_seed, int coordinate,
                                                       const std::vector<Rect>& n_list, int trials,
                                                       std::uint64_t master_salt = 0);

/// E[S-bar_n^2]/|n| over trials futures for each omega seed (pooled).
MeanEstimate variance_ratio(const FieldModel& model, const InnovationSpec& spec,
                            const std::vector<std::uint64_t>& omega_seeds, const Rect& n, int trials,
                            std::uint64_t n_index = 0, std::uint64_t master_salt = 0);

}  // namespace qfclt
