use std::f64::consts::PI;
use std::sync::OnceLock;

use num_rational::Rational64;
use proptest::prelude::*;
use stablemix::kernels::{apply_semigroup, stable_cdf_1d, stable_kernel, Semigroup};
use stablemix::noise::sample_driver_path;
use stablemix::pide::{picard_solve, residual, solve_driftfree, PicardOptions};
use stablemix::presets::DriftPreset;
use stablemix::probe::MCEstimate;
use stablemix::sim::{euler_maruyama, SimConfig, ZeroDrift};
use stablemix::spaces::multipliers::{evaluate, Multiplier};
use stablemix::zvonkin::{build_zvonkin_map, invert_map, Transform, ZvonkinMap, ZvonkinOptions};
use stablemix::{fieldfile, DriftSpec, ExactIndices, GridSpec, NoiseStream, PathSample, RegularityIndices, ScalarField, SpaceTimeField, StableParams};

fn small_map() -> &'static ZvonkinMap<f64> {
    static MAP: OnceLock<ZvonkinMap<f64>> = OnceLock::new();
    MAP.get_or_init(|| {
        let idx = RegularityIndices::new(1.5, 0.5, 8.0, 8.0, 1, 1).unwrap();
        let g = GridSpec::new(PI, PI, 32, 32, 0.2, 16).unwrap();
        let drift = DriftPreset::Bump { amplitude: 0.3, width: 0.5 }.sample(g);
        build_zvonkin_map(&drift, &idx, ZvonkinOptions::default()).unwrap()
    })
}

fn trig_source(g: GridSpec<f64>, a: f64, b: f64, k: f64) -> SpaceTimeField<f64> {
    SpaceTimeField::from_fn(g, move |t, x, y| a * (k * x + y).sin() * (1.0 + t) + b * (2.0 * y).cos())
}

fn sup_diff(a: &SpaceTimeField<f64>, b: &SpaceTimeField<f64>) -> f64 {
    a.sub(b).sup_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn larger_integrability_lowers_the_sum(alpha in 1.05f64..1.95, p in 1.5f64..40.0, q in 1.5f64..40.0, dp in 0.1f64..10.0) {
        let a = RegularityIndices::new(alpha, 0.5, p, q, 1, 1).unwrap().check();
        let b = RegularityIndices::new(alpha, 0.5, p + dp, q, 1, 1).unwrap().check();
        let c = RegularityIndices::new(alpha, 0.5, p, q + dp, 1, 1).unwrap().check();
        prop_assert!(b.sum < a.sum && c.sum < a.sum);
        prop_assert!(!a.main.holds || b.main.holds);
        prop_assert!(!a.krylov.holds || c.krylov.holds);
    }

    #[test]
    fn margin_sign_matches_verdict(alpha in 1.05f64..1.95, beta in 0.01f64..0.99, p in 1.5f64..40.0, q in 1.5f64..40.0) {
        let r = RegularityIndices::new(alpha, beta, p, q, 1, 1).unwrap().check();
        for (_, _, c) in r.rows() {
            prop_assert_eq!(c.holds, c.margin > 0.0);
        }
        prop_assert!(!r.gradx.holds || r.main.holds);
        prop_assert!(!r.main.holds || r.krylov.holds);
    }

    #[test]
    fn exact_and_float_checks_agree_off_the_boundary(a in 11i64..19, p in 2i64..60, q in 2i64..60) {
        let exact: ExactIndices = RegularityIndices::new(
            Rational64::new(a, 10), Rational64::new(1, 2), Rational64::from_integer(p), Rational64::from_integer(q), 1, 1,
        ).unwrap();
        let e = exact.check();
        let f = exact.to_f64().check();
        for ((_, _, x), (_, _, y)) in e.rows().iter().zip(f.rows().iter()) {
            if y.margin.abs() > 1e-12 {
                prop_assert_eq!(x.holds, y.holds);
            }
        }
    }

    #[test]
    fn multipliers_are_bounded(x1 in -1e4f64..1e4, x2 in -1e4f64..1e4, x3 in -1e4f64..1e4) {
        prop_assume!(x1.abs() + x2.abs() + x3.abs() > 1e-9);
        for m in Multiplier::ALL {
            prop_assert!(evaluate(m, 1.5, [x1, x2, x3]).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn stable_kernel_scales_and_is_symmetric(t in 0.1f64..5.0, x in -6.0f64..6.0) {
        let p = StableParams::new(1.5, 1).unwrap();
        let direct = stable_kernel(&p, t, &[x]).unwrap();
        let s = t.powf(-1.0 / 1.5);
        let scaled = s * stable_kernel(&p, 1.0, &[s * x]).unwrap();
        prop_assert!((direct - scaled).abs() <= 1e-9 * (1.0 + direct));
        prop_assert!((direct - stable_kernel(&p, t, &[-x]).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn stable_cdf_is_odd_about_one_half_and_monotone(x in 0.0f64..30.0, dx in 0.01f64..2.0) {
        let f = stable_cdf_1d(1.5, 1.0, x).unwrap();
        let g = stable_cdf_1d(1.5, 1.0, -x).unwrap();
        prop_assert!((f + g - 1.0).abs() <= 1e-9);
        prop_assert!(stable_cdf_1d(1.5, 1.0, x + dx).unwrap() >= f - 1e-12);
    }

    #[test]
    fn semigroup_is_a_sup_norm_contraction(t in 0.0f64..2.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = GridSpec::new(PI, PI, 32, 32, 1.0, 1).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (a * x.cos() + b * (3.0 * y).sin()).exp());
        let out = apply_semigroup(&f, 1.5, t, Semigroup::Product).unwrap();
        prop_assert!(out.sup_norm() <= f.sup_norm() * (1.0 + 1e-10));
        let mean_in: f64 = f.data.iter().sum::<f64>();
        let mean_out: f64 = out.data.iter().sum::<f64>();
        prop_assert!((mean_in - mean_out).abs() <= 1e-9 * mean_in.abs().max(1.0));
    }

    #[test]
    fn duhamel_solution_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let idx = RegularityIndices::new(1.5, 0.5, 8.0, 8.0, 1, 1).unwrap();
        let g = GridSpec::new(PI, PI, 16, 16, 0.5, 8).unwrap();
        let f1 = trig_source(g, 1.0, 0.0, 2.0);
        let f2 = trig_source(g, 0.0, 1.0, 1.0);
        let mix = SpaceTimeField::from_array(g, &f1.data * a + &f2.data * b + c).unwrap();
        let u = solve_driftfree(&mix, &idx).unwrap().u;
        let u1 = solve_driftfree(&f1, &idx).unwrap().u;
        let u2 = solve_driftfree(&f2, &idx).unwrap().u;
        let comb = SpaceTimeField::from_array(g, &u1.data * a + &u2.data * b).unwrap();
        // The constant mode solves u' = c exactly.
        let lin = SpaceTimeField::from_fn(g, |t, _, _| c * t);
        let expected = SpaceTimeField::from_array(g, &comb.data + &lin.data).unwrap();
        prop_assert!(sup_diff(&u, &expected) <= 1e-12);
    }

    #[test]
    fn fieldfile_round_trip(nx_pow in 2u32..6, ny_pow in 2u32..6, nt in 1usize..6, seed in any::<u64>()) {
        let g = GridSpec::new(1.0 + (seed % 7) as f64, 2.0, 1 << nx_pow, 1 << ny_pow, 0.75, nt).unwrap();
        let a = SpaceTimeField::from_fn(g, |t, x, y| (seed as f64 * 1e-19 + t + x * y).sin());
        let b = a.scaled(-3.5);
        let mut buf = Vec::new();
        fieldfile::write_fields(&mut buf, &[&a, &b]).unwrap();
        let back: Vec<SpaceTimeField<f64>> = fieldfile::read_fields(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn truncated_fieldfile_is_rejected(cut in 1usize..200) {
        let g = GridSpec::new(1.0, 1.0, 4, 4, 1.0, 2).unwrap();
        let a = SpaceTimeField::from_fn(g, |t, x, y| t + x - y);
        let mut buf = Vec::new();
        fieldfile::write_fields(&mut buf, &[&a]).unwrap();
        let keep = buf.len().saturating_sub(cut);
        prop_assert!(fieldfile::read_fields::<f64, _>(&mut &buf[..keep]).is_err());
    }

    #[test]
    fn estimate_of_constant_samples(v in -5.0f64..5.0, n in 2usize..50, bound in -5.0f64..5.0) {
        let e = MCEstimate::from_samples(&vec![v; n], 1, bound);
        prop_assert!((e.mean - v).abs() <= 1e-12 * v.abs().max(1.0));
        prop_assert!(e.stderr.abs() <= 1e-12);
        if (v - bound).abs() > 1e-9 {
            prop_assert_eq!(e.verdict, v <= bound);
        }
        prop_assert!(e.agrees_with(e.mean));
        prop_assert_eq!(e.agrees_with(e.mean + 1.0), false);
    }

    #[test]
    fn estimate_stderr_shrinks_with_replication(xs in prop::collection::vec(-10.0f64..10.0, 4..40)) {
        let once = MCEstimate::from_samples(&xs, 0, 0.0);
        let twice: Vec<f64> = xs.iter().chain(xs.iter()).copied().collect();
        let rep = MCEstimate::from_samples(&twice, 0, 0.0);
        prop_assert!((once.mean - rep.mean).abs() <= 1e-12);
        prop_assert!(rep.stderr <= once.stderr + 1e-15);
        prop_assert!(once.stderr >= 0.0);
    }

    #[test]
    fn zvonkin_inverse_round_trip(t in 0.0f64..0.2, x in -PI..PI, y in -PI..PI) {
        let map = small_map();
        let w = map.phi(t, [x, y]);
        let inv = invert_map(map, w, t, 1e-13, 200).unwrap();
        prop_assert!((inv.z[0] - x).abs() <= 1e-10 && (inv.z[1] - y).abs() <= 1e-10);
        prop_assert!(inv.ratios.iter().all(|&r| r <= map.grad_bound() + 1e-9));
    }

    #[test]
    fn coarsening_preserves_endpoints(seed in any::<u64>(), factor_pow in 0u32..4) {
        let p = StableParams::new(1.5, 1).unwrap();
        let fine: PathSample<f64> = sample_driver_path(&p, 1, 1.0, 64, &NoiseStream::new(seed, 0)).unwrap();
        let coarse = fine.coarsen(1 << factor_pow).unwrap();
        prop_assert_eq!(coarse.n_steps(), 64 >> factor_pow);
        for (k, s) in coarse.states.iter().enumerate() {
            let f = &fine.states[k << factor_pow];
            prop_assert!((s[0] - f[0]).abs() <= 1e-10 && (s[1] - f[1]).abs() <= 1e-10);
        }
    }

    #[test]
    fn zero_drift_euler_reproduces_the_driver(seed in any::<u64>(), z0 in -1.0f64..1.0) {
        let p = StableParams::new(1.5, 1).unwrap();
        let noise = sample_driver_path(&p, 1, 1.0, 32, &NoiseStream::new(seed, 3)).unwrap();
        let path = euler_maruyama(&ZeroDrift, &SimConfig::new([z0, -z0]), &noise).unwrap();
        for (a, b) in path.states.iter().zip(&noise.states) {
            prop_assert!((a[0] - z0 - b[0]).abs() <= 1e-10 && (a[1] + z0 - b[1]).abs() <= 1e-10);
        }
    }
}

#[test]
fn picard_with_zero_drift_is_the_driftfree_solve() {
    let idx = RegularityIndices::new(1.5, 0.5, 8.0, 8.0, 1, 1).unwrap();
    let g = GridSpec::new(PI, PI, 32, 32, 0.5, 16).unwrap();
    let f = trig_source(g, 1.0, 0.5, 3.0);
    let a = solve_driftfree(&f, &idx).unwrap().u;
    let b = picard_solve(&f, &DriftSpec::zero(g), &idx, PicardOptions::default()).unwrap().u;
    assert!(sup_diff(&a, &b) <= 1e-14);
}

#[test]
fn picard_solution_satisfies_the_equation() {
    let idx = RegularityIndices::new(1.5, 0.5, 8.0, 8.0, 1, 1).unwrap();
    let g = GridSpec::new(PI, PI, 32, 32, 0.25, 512).unwrap();
    let drift = DriftPreset::Bump { amplitude: 0.3, width: 0.5 }.sample(g);
    let f = trig_source(g, 1.0, 0.0, 1.0);
    let sol = picard_solve(&f, &drift, &idx, PicardOptions::default()).unwrap();
    let coarse = residual(&sol.u, &f, Some(&drift), 1.5);
    let inner = coarse.data.slice(ndarray::s![1..g.nt, .., ..]).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(inner <= 2e-2 * f.sup_norm(), "residual {inner}");
    let ratios: Vec<f64> = sol.iterates.iter().filter_map(|r| r.ratio).collect();
    assert!(ratios.iter().all(|&r| r < 1.0), "{ratios:?}");
}
