//! Core library for computing compute-forward achievable rate regions of
//! multiple-access channels: exact integer linear algebra, matroid
//! enumeration, algebraic entropy functionals, polyhedral rate-region
//! algebra, region assembly, and a numerical validation harness.

pub mod cf;
pub mod entropy;
pub mod linalg;
pub mod matroid;
pub mod region;
pub mod validate;

pub use cf::{
    conditional_entropy_term, example_gmac3_mimo_spec, example_gmac3_spec, fq_embed, j_term,
    lmac_region, mac_region, mod_q_centered, naga11_rate, next_prime_above, noiseless_adder_spec,
    noiseless_pair_spec, notch_condition, sequential_box, sequential_region, simultaneous_q,
    simultaneous_r, single_equation_region, BranchRecord, CfError, ChannelSpec, FiniteChannel,
    FqEmbedding, RegionReport, SearchBudget, UserPmf,
};
pub use entropy::{
    algebraic_entropy_discrete, conditional_algebraic_entropy_discrete,
    gaussian_algebraic_entropy, gaussian_conditional_covariance, quantized_entropy_estimate,
    shannon_entropy, shannon_entropy_of_probs, DiscretePmf, EntropyError, EntropyKind,
    EntropyValue, GaussianSource, JointDiscreteSource, QuantizedEstimate, VectorSampler,
};
pub use matroid::{enumerate_matroids, is_representation, vector_matroid, Matroid, MatroidError};
pub use region::{
    intersect, region_contains, region_equal, union, Polyhedron, RateBound, RateRegion,
    RegionError,
};

pub use linalg::{
    hermite_normal_form, is_small_prime, is_unimodular, orthogonal_lattice_basis, right_inverse,
    row_lattice_contains, smith_normal_form, solve_left, successive_minima, IntMatrix,
    LinAlgError, Norm, Ring, SmithForm,
};
pub use validate::{
    check_chain_and_mi, check_discrete_lemma, check_entropy_difference_bound,
    check_lattice_counting, check_makkuva_wu, check_renyi, dyadic_schedule, suite_check,
    validation_suite, CheckReport, ReferenceContinuous, ValidateError, SUITE_NAMES,
    SUITE_SAMPLES,
};

/// Number of worker threads honoured by the parallel search and estimation
/// paths: the `CFREGION_THREADS` environment variable when set to a positive
/// integer, otherwise the machine's available parallelism.
pub fn worker_count() -> usize {
    if let Ok(v) = std::env::var("CFREGION_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
