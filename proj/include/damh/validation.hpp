#pragma once

#include <cstdint>

namespace damh::validation {

struct UnbiasednessCheck {
  double mean_ratio = 0.0;  // mean of exp(estimate - exact log-likelihood)
  double std_error = 0.0;
  int n_reps = 0;
  bool pass = false;        // |mean - 1| <= 3 standard errors
};

/// Bootstrap filter vs exact forward sums on an enumerable two-step,
/// two-state hidden Markov model (single particle).
UnbiasednessCheck pf_check_hmm(int n_reps, std::uint64_t seed);

/// Bootstrap filter vs the Kalman oracle on a linear-Gaussian state space
/// model.
UnbiasednessCheck pf_check_lgss(int n_reps, std::uint64_t seed, int n_particles = 64);

struct LnaLinearCheck {
  double max_abs_err = 0.0;  // |LNA recursion - independent Kalman| on the
                             // log-likelihood of a linear birth-death system
  bool pass = false;         // <= 1e-6
};

LnaLinearCheck lna_check_linear();

struct LnaStepCheck {
  double delta = 0.0;  // |loglik(dt) - loglik(dt/2)| at the study parameters
  bool pass = false;   // < 1e-8
};

LnaStepCheck lna_check_step_halving();

}  // namespace damh::validation
