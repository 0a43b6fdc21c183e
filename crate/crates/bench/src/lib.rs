//! Fixtures shared by the benchmarks.

use steplearn_core::instance::generate_instance;
use steplearn_core::{CertificateContext, InstanceDistribution, Interval, ProblemInstance};

pub fn distribution(dimension: usize) -> InstanceDistribution {
    InstanceDistribution {
        seed: 17,
        dimension,
        eigenvalue_range: Interval::new(0.5, 1.0),
        initial_norm_range: Interval::new(0.5, 1.0),
        gradient_tolerance_nu: Some(1e-6),
    }
}

/// `count` instances of the given dimension, drawn deterministically.
pub fn instances(dimension: usize, count: usize) -> Vec<ProblemInstance> {
    let dist = distribution(dimension);
    (0..count as u64)
        .map(|i| generate_instance(&dist, i).expect("valid distribution"))
        .collect()
}

pub fn gd_context() -> CertificateContext {
    CertificateContext {
        l: 1.0,
        z: 1.0,
        nu: 0.01,
        beta: 0.45,
        rho_interval: Interval::new(0.6, 1.2),
        eta_interval: None,
        c: 0.1,
        epsilon: 0.1,
        delta: 0.1,
        uc_constant_k: 1.0,
    }
}

pub fn cg_context() -> CertificateContext {
    CertificateContext {
        l: 0.1,
        nu: 1e-3,
        beta: 0.29,
        rho_interval: Interval::new(8.0, 8.005),
        eta_interval: Some(Interval::new(0.105, 0.10504)),
        ..gd_context()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(instances(4, 3).len(), 3);
        gd_context().validate().unwrap();
        cg_context().validate().unwrap();
    }
}
