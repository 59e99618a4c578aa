#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rgl/gas.hpp"
#include "rgl/reference.hpp"

namespace rgl {

/// Blown-up local pictures of a configuration around random tags. Window i
/// holds the points of N^{1/d}(C - tag_i) inside [-R_w, R_w)^d.
struct EmpiricalField {
    int d = 1;
    double N = 1.0;
    double window_radius = 1.0;
    std::vector<double> tags;           // flat, d per tag
    std::vector<Configuration> windows;
    std::vector<double> intensities;    // expected micro intensity per window

    std::size_t size() const { return windows.size(); }
    void append(const EmpiricalField& o);
};

/// Tags uniform on the support of the model's equilibrium measure.
EmpiricalField empirical_field(const Configuration& c, const GasModel& m, int n_tags, double R_w, std::uint64_t seed);

/// Windows cut from a microscopic configuration (a Poisson or lattice sample)
/// at tags uniform in `region` shrunk by R_w, all with the given intensity.
EmpiricalField field_from_micro(const Configuration& c, const Window& region, double intensity, int n_tags, double R_w,
                                std::uint64_t seed);

/// Windows supplied directly; each is already centred.
EmpiricalField field_from_windows(std::vector<Configuration> windows, double intensity, double R_w);

/// Truncated series sum_k 2^{-k} min(1, d_k / max(n_k + n'_k, 1)) with d_k the
/// bounded-Lipschitz distance of the restrictions to [-k/2, k/2]^d.
double config_distance(const Configuration& a, const Configuration& b, int K_max);
/// Bounded-Lipschitz distance between two finite point sets (all points used).
double bounded_lipschitz_distance(const Configuration& a, const Configuration& b);
constexpr std::size_t kAssignmentMaxPoints = 1000;

/// Tent-smoothed point counts over sub-boxes of dyadic sides up to R_w,
/// passed through unit hat functions and averaged over shifted positions.
/// Every member is 1-Lipschitz under moving a single point and bounded by 1.
struct TestFunctionFamily {
    struct Member {
        double side;   // sub-box side
        double level;  // hat centre, or -1 for the scaled mean count
    };
    static constexpr const char* version = "dyadic-tent-v1";
    int d = 1;
    double window_radius = 1.0;
    std::vector<Member> members;

    static TestFunctionFamily make(int d, double R_w);
    std::vector<double> evaluate(const Configuration& window) const;
};

/// max over the family of |mean over F1 - mean over F2|; a lower bound of the
/// Dudley distance restricted to this family.
double field_distance(const EmpiricalField& a, const EmpiricalField& b, const TestFunctionFamily& T);

/// Points in [-R/2, R/2)^d minus m R^d.
double discrepancy(const Configuration& window, double m, double R, double window_radius);

struct VariancePoint {
    double R = 0.0;
    double variance = 0.0;
    double std_error = 0.0;
    double mean = 0.0;
};
std::vector<VariancePoint> number_variance_curve(const EmpiricalField& f, const std::vector<double>& R_list);

struct Histogram {
    std::vector<double> edges;    // size bins + 1
    std::vector<double> density;  // normalized to unit integral
    std::vector<std::size_t> counts;
};
Histogram make_histogram(const std::vector<double>& values, double lo, double hi, int bins);

struct Spacings {
    std::vector<double> gaps;  // unit mean
    Histogram histogram;
};
/// Nearest-neighbour gaps of the central `bulk_fraction` of the ordered
/// points, after unfolding by the pooled empirical distribution function.
Spacings spacing_histogram(const std::vector<Configuration>& samples, double bulk_fraction, int bins = 50,
                           double max_gap = 5.0);

struct PairCorrelationRow {
    double r_lo = 0.0, r_hi = 0.0;
    double g = 0.0;
};
/// Translation-corrected estimate, normalized by the window intensities.
std::vector<PairCorrelationRow> pair_correlation(const EmpiricalField& f, const std::vector<double>& r_edges);

struct EntropyEstimate {
    double unit_reference = 0.0;     // against the unit-intensity Poisson law
    double matched_reference = 0.0;  // against Poisson of the empirical intensity
    double intensity = 0.0;
    std::size_t cells = 0;
};
constexpr std::size_t kEntropyMinCells = 1000;
/// Plug-in estimate l^{-d} KL(p_hat || Poisson) of per-cell counts over cells
/// of side l tiling windows of side L.
EntropyEstimate entropy_rate_estimate(const std::vector<Configuration>& windows, double cell, double side);
EntropyEstimate entropy_rate_estimate(const EmpiricalField& f, double cell);

/// W/2 + (Ent + 1 - |Sigma|) / beta.
double rate_function_estimate(double W_hat, double Ent_hat, double beta, double sigma_volume);

// Distribution comparisons.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_exponential(std::vector<double> a);
/// Pearson chi-square p-value of counts against equal cell probabilities.
double chi2_uniform_pvalue(const std::vector<std::size_t>& counts);
/// Wasserstein-1 distance between the empirical law of 1D points and the
/// cell-constant density of a measure.
double wasserstein1_to_measure(std::vector<double> points, const EquilibriumMeasure& mu);
/// Same against a closed-form distribution function on [lo, hi].
double wasserstein1_to_cdf(std::vector<double> points, const std::function<double(double)>& cdf, double lo, double hi);

/// Mean number of points per unit area in annuli [r_k, r_{k+1}) of planar
/// configurations, averaged over the samples.
std::vector<double> radial_density(const std::vector<Configuration>& samples, const std::vector<double>& r_edges);
/// Counts of points per angular sector.
std::vector<std::size_t> angular_counts(const std::vector<Configuration>& samples, int sectors);

}  // namespace rgl
