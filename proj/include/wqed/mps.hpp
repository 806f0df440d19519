#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wqed/tensor.hpp"

namespace wqed {

enum class SiteKind { system, time_bin };

/// One chain site: a rank-3 tensor with (left bond, physical, right bond)
/// axes plus a role label. Time bins carry the step they were created for.
struct SiteTensor {
    Tensor data;  // rank-3 (left, phys, right)
    SiteKind kind = SiteKind::time_bin;
    int time_index = 0;

    long left_bond() const { return data.extent(0); }
    long phys() const { return data.extent(1); }
    long right_bond() const { return data.extent(2); }
};

struct SchmidtSpectrum {
    std::vector<double> values;  // descending, squares sum to 1
    enum class Cut { system_cut, feedback_cut } cut = Cut::system_cut;
    int time_index = 0;
};

/// Which of the two sites keeps the orthogonality center after a swap.
enum class OcSide { left, right };

struct ApplyGateOptions {
    bool strict_unitary = true;    // reject non-unitary gates
    double unitary_tol = 1e-8;
};

struct TruncationStats {
    double discarded = 0.0;  // accumulated squared weight dropped
    long peak_bond = 1;
    int alarms = 0;          // steps whose discarded weight crossed the alarm threshold
};

/// Matrix product state with a tracked orthogonality center (OC).
/// Sites left of the OC are kept left-normalized, sites right of it
/// right-normalized. All bond factorizations go through svd_truncate with
/// this state's bond cap and relative cutoff, rescaling kept weights so the
/// global norm is preserved.
class Mps {
public:
    Mps() = default;
    Mps(std::vector<SiteTensor> sites, int oc, long bond_max, double cutoff);

    long num_sites() const { return static_cast<long>(sites_.size()); }
    const SiteTensor& site(long k) const { return sites_.at(static_cast<size_t>(k)); }
    int oc_index() const { return oc_; }
    long bond_max() const { return bond_max_; }
    double cutoff() const { return cutoff_; }
    const TruncationStats& stats() const { return stats_; }
    void reset_step_discarded() { step_discarded_ = 0.0; }
    double step_discarded() const { return step_discarded_; }

    /// Moves the orthogonality center to `target` through single-bond SVDs.
    void move_oc(long target);

    /// Exchanges the physical legs (and labels) of sites k and k+1.
    /// Requires the OC on one of the two sites; it ends on `keep`.
    void swap_adjacent(long k, OcSide keep = OcSide::right);

    /// Applies a square gate over the joined physical space of n adjacent
    /// sites starting at `first`. The window is re-split via svd_truncate
    /// and the OC lands on the leftmost system-kind site of the window
    /// (leftmost site if none). Requires the OC inside the window.
    void apply_gate(const Tensor& gate, long first, long n,
                    const ApplyGateOptions& opts = {});

    /// Window application with re-ordering: after multiplying the gate, the
    /// physical legs are emitted in `out_order` (a permutation of the input
    /// slots) and the OC lands on `oc_slot` (position in the output order).
    /// Returns the OC-form snapshot of every output slot and the Schmidt
    /// values at each internal cut of the window.
    struct WindowResult {
        std::vector<Tensor> oc_snapshots;               // rank-3, one per output slot
        std::vector<std::vector<double>> cut_values;    // n-1 internal cuts
    };
    WindowResult apply_gate_window(const Tensor* gate, long first, long n,
                                   const std::vector<long>& out_order, long oc_slot,
                                   const ApplyGateOptions& opts = {});

    /// <psi|op|psi> on one site; moves the OC there.
    Complex expectation_local(const Tensor& op, long site);

    /// Schmidt values of the bipartition with `bond` sites on the left,
    /// square-normalized and descending. Moves the OC.
    SchmidtSpectrum schmidt_at_cut(long bond);

    /// Sqrt-eigenvalues of the one-site reduced density matrix, i.e. the
    /// Schmidt spectrum of the site-versus-rest bipartition. Moves the OC.
    SchmidtSpectrum schmidt_single_site(long site);

    double norm() const;  // sqrt(<psi|psi>), from the OC tensor

    /// Versioned binary dump; round-trips bit-exactly.
    void save(const std::string& path) const;
    static Mps load(const std::string& path);

private:
    void check_site(long k) const;
    void move_oc_right_once();
    void move_oc_left_once();
    SvdResult split(const Tensor& theta, long rows, long cols);

    std::vector<SiteTensor> sites_;
    int oc_ = 0;
    long bond_max_ = 1;
    double cutoff_ = 1e-12;
    TruncationStats stats_;
    double step_discarded_ = 0.0;
};

/// <a|b> by a transfer-matrix sweep; requires matching physical extents.
Complex global_overlap(const Mps& a, const Mps& b);

} // namespace wqed
