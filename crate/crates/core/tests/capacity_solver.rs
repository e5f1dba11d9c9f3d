use sbfcast_core::capacity::{
    rho_values, solve_mc_covariance, CovarianceMatrix, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use sbfcast_core::linalg::{hermitian_residual, lambda_max, outer, CMatrix};
use sbfcast_core::sampling::{sample_channel_set, ChannelSet, SeededStream};

/// Objective of the N=4, M=8 instance drawn from seed 2024, stream 0, as
/// computed by an interior-point conic solver (CLARABEL via CVXPY).
const GOLDEN_OBJECTIVE: f64 = 1.089_913_951_2;

#[test]
fn golden_instance_reproduced() {
    let ch = sample_channel_set(4, 8, SeededStream::new(2024, 0)).unwrap();
    let sol = solve_mc_covariance(&ch, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(sol.converged, "gap {}", sol.gap());
    assert!((sol.objective - GOLDEN_OBJECTIVE).abs() <= 1e-5, "{}", sol.objective);
    assert!(sol.dual_bound >= GOLDEN_OBJECTIVE - 1e-9);
}

#[test]
fn single_user_closed_form() {
    for seed in 0..10 {
        let ch = sample_channel_set(5, 1, SeededStream::new(seed, 0)).unwrap();
        let h = ch.get(0);
        let sol = solve_mc_covariance(&ch, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let want = outer(h).unscale(h.norm_squared());
        assert!((sol.covariance.entries() - want).norm() <= 1e-10);
        let rv = rho_values(&sol.covariance, &ch).unwrap();
        assert!((rv.rho_min - h.norm_squared()).abs() <= 1e-10 * h.norm_squared());
    }
}

fn check_solution(ch: &ChannelSet, tol: f64) {
    let sol = solve_mc_covariance(ch, tol, DEFAULT_MAX_ITER).unwrap();
    assert!(sol.converged, "gap {}", sol.gap());
    let w = sol.covariance.entries();
    assert!(hermitian_residual(w) <= 1e-12);
    assert!((sol.covariance.trace() - 1.0).abs() <= 1e-10);
    assert!(*sol.covariance.eigen().0.last().unwrap() >= -1e-10);
    let rv = rho_values(&sol.covariance, ch).unwrap();
    assert!((rv.rho_min - sol.objective).abs() < 1e-12);
    assert!(rv.rho.iter().all(|&r| r >= 0.0));
    // The dual bound is λ_max of a convex combination of the outer products.
    let scale = ch.channels().iter().map(|h| h.norm_squared()).fold(0.0, f64::max);
    assert!(sol.dual_bound <= scale + 1e-12);
    // No trace-one rank-one direction does better than the certificate allows.
    for h in ch.channels() {
        let v = h.unscale(h.norm());
        let wv = outer(&v);
        let obj = ch.channels().iter().map(|g| g.dotc(&(&wv * g)).re).fold(f64::INFINITY, f64::min);
        assert!(obj <= sol.objective + tol);
    }
}

#[test]
fn random_instances_certify() {
    for (n, m, seed) in [(2, 3, 1), (3, 5, 2), (4, 8, 3), (4, 16, 4), (4, 24, 5), (6, 10, 6), (8, 4, 7)] {
        check_solution(&sample_channel_set(n, m, SeededStream::new(seed, 0)).unwrap(), 1e-7);
    }
}

#[test]
fn more_antennas_than_users_reaches_dual_bound() {
    // With M ≤ N orthonormal channels the optimum spreads power evenly.
    let n = 4;
    let channels: Vec<_> = (0..3).map(|k| CMatrix::identity(n, n).column(k).into_owned()).collect();
    let ch = ChannelSet::new(channels).unwrap();
    let sol = solve_mc_covariance(&ch, 1e-9, DEFAULT_MAX_ITER).unwrap();
    assert!((sol.objective - 1.0 / 3.0).abs() < 1e-8);
    let p = vec![1.0 / 3.0; 3];
    let a = ch.channels().iter().zip(&p).fold(CMatrix::zeros(n, n), |acc, (h, &w)| acc + outer(h).scale(w));
    assert!((lambda_max(&a) - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn isotropic_is_feasible_but_not_better() {
    let ch = sample_channel_set(4, 8, SeededStream::new(77, 0)).unwrap();
    let iso = rho_values(&CovarianceMatrix::isotropic(4), &ch).unwrap().rho_min;
    let sol = solve_mc_covariance(&ch, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(sol.objective >= iso);
}
