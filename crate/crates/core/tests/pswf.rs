use ftn_tbp::bounds::na_rate;
use ftn_tbp::channel::{make_channel, ChannelModel};
use ftn_tbp::pswf::*;
use ftn_tbp::pulse::{make_rrc_default, min_c, PulseFamily};
use ftn_tbp::special::db_to_linear;

#[test]
fn trace_identity_and_refinement() {
    let b = solve_basis(10.0, 92, 216).unwrap();
    assert!((b.eigenvalues.iter().sum::<f64>() - 10.0).abs() < 1e-3);
    let fine = solve_basis(10.0, 92, 432).unwrap();
    for n in 0..=6 {
        assert!((b.eigenvalues[n] - fine.eigenvalues[n]).abs() < 1e-8, "mode {n}");
    }
    assert!(b.eigenvalues[0] < 1.0);
    assert!(b.eigenvalues.iter().all(|&m| m > 0.0 && m <= 1.0));
}

#[test]
fn parity_alternates() {
    let b = solve_basis(16.0, 20, 80).unwrap();
    for (k, p) in b.parities.iter().enumerate().take(18) {
        assert_eq!(*p, if k % 2 == 0 { Parity::Even } else { Parity::Odd });
        let phi = |t: f64| b.eval(k, t);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for t in [0.7, 3.1, 6.5] {
            assert!((phi(-t) - sign * phi(t)).abs() < 1e-8 * phi(t).abs().max(1e-6));
        }
    }
}

#[test]
fn design_point_dimensions() {
    let (n, eta) = max_dimensions(132.0, 1e-4).unwrap();
    assert_eq!(n, 128);
    assert!((eta - 4.0).abs() < 1e-12);
}

#[test]
fn dimension_loss_across_tbp() {
    // 3 < eta < 5 holds up to Omega ~ 200; from there on the loss is exactly 3
    for omega in [50.0, 60.0, 100.0, 132.0, 200.0] {
        let (_, eta) = max_dimensions(omega, 1e-4).unwrap();
        assert!(eta > 3.0 && eta < 5.0, "Omega={omega}: eta={eta}");
    }
    for omega in [300.0, 480.0] {
        let (_, eta) = max_dimensions(omega, 1e-4).unwrap();
        assert_eq!(eta, 3.0, "Omega={omega}");
    }
}

#[test]
fn loose_target_rule_of_thumb() {
    for omega in [10.0, 20.0, 30.0] {
        let (_, eta) = max_dimensions(omega, 1e-2).unwrap();
        assert!((eta - 2.0).abs() <= 1.0, "Omega={omega}: eta={eta}");
    }
}

#[test]
fn dimensions_grow_with_tbp_and_tolerance() {
    let mut last = 0;
    for omega in [10.0, 20.0, 40.0, 80.0] {
        let (n, _) = max_dimensions(omega, 1e-4).unwrap();
        assert!(n >= last);
        last = n;
    }
    let mut last = 0;
    for eps in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1] {
        let (n, _) = max_dimensions(40.0, eps).unwrap();
        assert!(n >= last);
        last = n;
    }
    assert!(max_dimensions(40.0, 0.0).is_err());
}

#[test]
fn uniform_benchmark_is_flat_channel_na() {
    let omega = 40.0;
    let rho = db_to_linear(20.0);
    let (n, _) = max_dimensions(omega, 1e-4).unwrap();
    let flat = ChannelModel::flat(omega, rho, n);
    let want = na_rate(&flat, 1e-3).unwrap();
    assert_eq!(uniform_benchmark(omega, 1e-4, rho, 1e-3).unwrap(), want);

    // vanishing SNR leaves only the third-order term
    let tiny = uniform_benchmark(omega, 1e-4, 1e-30, 1e-3).unwrap();
    assert!((tiny - omega.log2() / (2.0 * omega)).abs() < 1e-9);
}

#[test]
fn uniform_benchmark_beats_truncated_rrc() {
    let omega = 100.0;
    let rho = db_to_linear(30.0);
    let bench = uniform_benchmark(omega, 1e-4, rho, 1e-3).unwrap();
    for beta in [0.1, 0.3, 0.5, 1.0] {
        let c = min_c(PulseFamily::Rrc { beta }, 1e-4, 0.5).unwrap();
        let p = make_rrc_default(beta, 0.5, c).unwrap();
        for tau in [1.0, 0.9, 0.8, 0.7, 0.6, 0.5] {
            let Ok(ch) = make_channel(&p, omega, rho, tau) else { continue };
            let r = na_rate(&ch, 1e-3).unwrap();
            assert!(r < bench, "beta={beta} tau={tau}: {r} vs {bench}");
        }
    }
}

#[test]
fn waterfill_equal_modes_is_uniform() {
    let mu = vec![0.9999; 12];
    let rho = 50.0;
    let omega = 12.0;
    let wf = waterfill_from_eigenvalues(&mu, omega, 1e-3, rho, 1e-3).unwrap();
    let uni = uniform_from_eigenvalues(&mu, omega, 1e-3, rho, 1e-3).unwrap();
    assert!((wf - uni).abs() < 1e-9);
}

#[test]
fn waterfill_beats_uniform() {
    let rho = db_to_linear(30.0);
    let wf = waterfill_benchmark(100.0, 1e-4, rho, 1e-3).unwrap();
    let uni = uniform_benchmark(100.0, 1e-4, rho, 1e-3).unwrap();
    assert!(wf >= uni, "{wf} vs {uni}");
}

/// Multipliers by an independent search: scan log θ₁ and bisect θ₂ on the
/// power equality at each step, then refine the OOB crossing.
fn grid_multipliers(mu: &[f64], total: f64, eps: f64) -> (f64, f64) {
    let power = |t1: f64, t2: f64| mu.iter().map(|m| (total / (t1 * (1.0 - m) + t2) - 1.0).max(0.0)).collect::<Vec<_>>();
    let t2_for = |t1: f64| {
        let (mut lo, mut hi) = (1e-12f64, 1e12f64);
        for _ in 0..400 {
            let mid = (lo * hi).sqrt();
            if power(t1, mid).iter().sum::<f64>() > total {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    };
    let oob = |t1: f64| {
        let t2 = t2_for(t1);
        power(t1, t2).iter().zip(mu).map(|(p, m)| p * (1.0 - m)).sum::<f64>() - eps * total
    };
    let grid: Vec<f64> = (0..400).map(|k| 10f64.powf(-4.0 + k as f64 * 0.04)).collect();
    let k = grid.windows(2).position(|w| oob(w[0]) > 0.0 && oob(w[1]) <= 0.0).expect("bracket");
    let (mut lo, mut hi) = (grid[k], grid[k + 1]);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if oob(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t1 = (lo * hi).sqrt();
    (t1, t2_for(t1))
}

#[test]
fn waterfill_multipliers_and_kkt() {
    let omega = 20.0;
    let mu = global_cache().eigenvalues(omega).unwrap();
    let total = db_to_linear(20.0) * omega;
    let eps = 1e-4;
    let sol = waterfill(&mu, total, eps).unwrap();
    assert!(sol.power_residual.abs() <= 1e-8 && sol.oob_residual.abs() <= 1e-8);
    let (t1, t2) = grid_multipliers(&mu, total, eps);
    assert!((sol.theta1 / t1 - 1.0).abs() < 1e-6, "{} vs {t1}", sol.theta1);
    assert!((sol.theta2 / t2 - 1.0).abs() < 1e-6, "{} vs {t2}", sol.theta2);
    for (p, m) in sol.powers.iter().zip(mu.iter()) {
        let level = total / (sol.theta1 * (1.0 - m) + sol.theta2);
        if *p > 0.0 {
            assert!((p + 1.0 - level).abs() < 1e-9 * level);
        } else {
            assert!(level <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn waterfill_insensitive_to_mode_cap() {
    let omega = 40.0;
    let rho = db_to_linear(30.0);
    let quad = required_quad_points(omega, 100);
    let deep = solve_basis(omega, 100, quad).unwrap().eigenvalues;
    let capped = &deep[..default_modes(omega)];
    let a = waterfill_from_eigenvalues(capped, omega, 1e-4, rho, 1e-3).unwrap();
    let b = waterfill_from_eigenvalues(&deep, omega, 1e-4, rho, 1e-3).unwrap();
    assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
}
