#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eegbench/data_ingest.hpp"

namespace eegbench::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Check {
  std::string name;
  /// Acceptance criterion the check belongs to; 0 for module invariants.
  int criterion = 0;
  std::function<CheckResult(std::uint64_t seed)> run;
};

/// Oracle and property suites that need no dataset, in a fixed order.
const std::vector<Check>& property_checks();

/// Every layer type and both recurrent cells against central differences
/// (eps 1e-5) over 20 random configurations each; passes below 1e-4.
CheckResult gradient_checks(std::uint64_t seed);
/// Recurrent backward vs a hand-unrolled 3-step scalar cell differentiated
/// with dual numbers; passes within 1e-10.
CheckResult bptt_oracle(std::uint64_t seed);
/// Softmax of random logits in [-100, 100] sums to 1 within 1e-9.
CheckResult softmax_stability(std::uint64_t seed);
/// Mean train-mode dropout output over 1e4 masks lies within 3 sigma of the
/// eval-mode output.
CheckResult dropout_expectation(std::uint64_t seed);

/// Sorted-sweep AUC vs pair counting and trapezoidal ROC on 1000 random
/// instances, plus the four-point fixture.
CheckResult auc_oracle(std::uint64_t seed);
/// Split and fold partitions, stratification and determinism on 1000 fixtures.
CheckResult split_invariants(std::uint64_t seed);

CheckResult nb_closed_form(std::uint64_t seed);
CheckResult knn_memorization(std::uint64_t seed);
CheckResult gbdt_monotone_loss(std::uint64_t seed);
CheckResult gbdt_staged_equivalence(std::uint64_t seed);
CheckResult linear_monotone_loss(std::uint64_t seed);
CheckResult tree_affine_invariance(std::uint64_t seed);
CheckResult prob_validity_fuzz(std::uint64_t seed);

/// EEG-like records with class-specific rhythms: spiky high-amplitude bursts
/// for Seizure, slow waves for the two interictal classes, alpha for
/// EyesClosed and low-amplitude fast activity for EyesOpen. Values are
/// rounded to integers like the public recordings.
EegDataset synthetic_dataset(std::size_t per_class, std::uint64_t seed);

}  // namespace eegbench::checks
