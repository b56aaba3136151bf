//! Property tests across the library.

mod common;

use std::f64::consts::PI;

use common::{function_from, symbol_from_modes, ModeParams};
use kg_reduce::bony::{bony_split, box_weights, dense_majorant_norm};
use kg_reduce::cantor::{in_cantor, EigenSource, FrequencyWindow};
use kg_reduce::config::{OmegaSpec, RunConfig};
use kg_reduce::diffeo::{composition_pair, invert_diffeo};
use kg_reduce::evolution::{evolve_original, to_complex, to_real, EvolutionConfig};
use kg_reduce::fourier::{Grid, LatticeBox, TorusFunction};
use kg_reduce::pipeline::{run_pipeline, KGCoefficients, PipelineConfig};
use kg_reduce::pseudo::{compose_sharp, SharpMode};
use kg_reduce::report::fmt_f64;
use kg_reduce::toeplitz::ToeplitzOperator;
use kg_reduce::transport::solve_transport;
use kg_reduce::C64;
use proptest::prelude::*;

fn coeffs(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

fn mode_params() -> impl Strategy<Value = Vec<ModeParams>> {
    prop::collection::vec((-0.5..0.5f64, -0.5..0.5f64, 0.0..1.0f64, 0.0..1.0f64), 15)
}

fn small_box() -> LatticeBox {
    LatticeBox::new(1, 6, 12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sobolev_norm_is_monotone_in_s(c in coeffs(5 * 9), s in 0.0..6.0f64, ds in 0.0..3.0f64) {
        let u = function_from(small_box(), 2, 4, &c);
        prop_assert!(u.sobolev_norm(s) <= u.sobolev_norm(s + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn majorant_has_the_same_norm(c in coeffs(5 * 9), s in 0.0..6.0f64) {
        let u = function_from(small_box(), 2, 4, &c);
        let mut m = u.clone();
        for z in m.coeffs_mut() {
            *z = C64::new(z.norm(), 0.0);
        }
        prop_assert!((u.sobolev_norm(s) - m.sobolev_norm(s)).abs() <= 1e-13 * u.sobolev_norm(s).max(1.0));
    }

    #[test]
    fn product_is_commutative_and_associative(a in coeffs(9), b in coeffs(9), c in coeffs(9)) {
        // Supports |ℓ| ≤ 1, |j| ≤ 1 keep every intermediate product inside the box.
        let bx = small_box();
        let (u, v, w) = (function_from(bx, 1, 1, &a), function_from(bx, 1, 1, &b), function_from(bx, 1, 1, &c));
        let uv = u.multiply(&v).unwrap();
        prop_assert!(uv.sub(&v.multiply(&u).unwrap()).unwrap().max_abs() <= 1e-15);
        let l = uv.multiply(&w).unwrap();
        let r = u.multiply(&v.multiply(&w).unwrap()).unwrap();
        prop_assert!(l.sub(&r).unwrap().max_abs() <= 1e-14);
    }

    #[test]
    fn sobolev_interpolation(a in coeffs(5 * 9), b in coeffs(5 * 9),
                             a0 in 0.0..3.0f64, b0 in 0.0..3.0f64, p in 0.0..2.0f64, q in 0.0..2.0f64) {
        let bx = small_box();
        let (u, v) = (function_from(bx, 2, 4, &a), function_from(bx, 2, 4, &b));
        let lhs = u.sobolev_norm(a0 + p) * v.sobolev_norm(b0 + q);
        let rhs = u.sobolev_norm(a0 + p + q) * v.sobolev_norm(b0) + u.sobolev_norm(a0) * v.sobolev_norm(b0 + p + q);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn conjugate_operator_entries(a in coeffs(9), b in coeffs(9)) {
        let bx = LatticeBox::new(1, 3, 6).unwrap();
        let op = ToeplitzOperator::multiplication(&function_from(bx, 1, 1, &a))
            .compose(&ToeplitzOperator::multiplier(bx, |j| C64::new(j as f64, 0.5)))
            .unwrap()
            .add(&ToeplitzOperator::multiplication(&function_from(bx, 1, 1, &b)))
            .unwrap();
        let c = op.conj_op();
        for l in -3i64..=3 {
            for j in -6i64..=6 {
                for k in -6i64..=6 {
                    prop_assert_eq!(c.entry(&[l], j, k), op.entry(&[-l], -j, -k).conj());
                }
            }
        }
    }

    #[test]
    fn conjugate_quantizes_conjugate_symbol(m in mode_params(), order in prop::sample::select(vec![-1.0, 0.0, 1.0])) {
        let a = symbol_from_modes(LatticeBox::new(1, 3, 8).unwrap(), order, &m);
        let l = a.quantize().conj_op();
        let r = a.conj_symbol().quantize();
        prop_assert!(l.sub(&r).unwrap().max_abs() <= 1e-15 * a.max_abs().max(1.0));
    }

    #[test]
    fn bony_part_bound(a in coeffs(5 * 5), s in 3.5..6.0f64) {
        let bx = LatticeBox::new(1, 3, 5).unwrap();
        let op = ToeplitzOperator::multiplication(&function_from(bx, 2, 2, &a))
            .compose(&ToeplitzOperator::multiplier(bx, |j| C64::new(1.0 / (1.0 + j.abs() as f64), 0.0)))
            .unwrap();
        let sp = bony_split(&op, s);
        let w = box_weights(&bx);
        let ss = bx.s_star();
        let lhs = dense_majorant_norm(&sp.m, &w, s, s);
        let rhs = 3f64.powf(s - ss) * dense_majorant_norm(&sp.operator(), &w, ss, ss);
        prop_assert!(lhs <= rhs * (1.0 + 1e-6), "{lhs} > {rhs}");
    }

    #[test]
    fn membership_is_monotone_in_gamma(w in -0.5..0.5f64, g1 in 0.001..0.2f64, g2 in 0.001..0.2f64) {
        let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
        let win = FrequencyWindow::new(1, hi, 7.0, 8, 8, EigenSource::Unperturbed { c_frak: 0.0, mass: 1.0 }).unwrap();
        if in_cantor(&[w], &win).unwrap().ok {
            prop_assert!(in_cantor(&[w], &win.with_gamma(lo)).unwrap().ok);
        }
    }

    #[test]
    fn fixed_precision_floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn real_complex_coordinates_invert(c in coeffs(13), d in coeffs(13), mass in 0.1..4.0f64) {
        let psi: Vec<C64> = c.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let v: Vec<C64> = d.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let (p2, v2) = to_real(&to_complex(&psi, &v, mass, 6), mass, 6);
        for (x, y) in p2.iter().zip(&psi).chain(v2.iter().zip(&v)) {
            prop_assert!((x - y).norm() <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quantization_is_a_homomorphism(ma in mode_params(), mb in mode_params(),
                                      oa in prop::sample::select(vec![-1.0, 0.0, 1.0]),
                                      ob in prop::sample::select(vec![-1.0, 0.0, 1.0])) {
        let bx = LatticeBox::new(1, 4, 10).unwrap();
        let a = symbol_from_modes(bx, oa, &ma);
        let b = symbol_from_modes(bx, ob, &mb);
        let ab = compose_sharp(&a, &b, SharpMode::Full).unwrap().quantize();
        let (qa, qb) = (a.quantize(), b.quantize());
        let prod = qa.compose(&qb).unwrap();
        let scale = qa.max_abs() * qb.max_abs();
        for l in -2i64..=2 {
            for j in -6i64..=6 {
                for k in -6i64..=6 {
                    prop_assert!((ab.entry(&[l], j, k) - prod.entry(&[l], j, k)).norm() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn conjugating_a_multiplication_shifts_its_argument(amp in -2e-3..2e-3f64, c in coeffs(3)) {
        // C_α M_w C_α⁻¹ = M_{w(x+α)} for ξ-independent w.
        let bx = LatticeBox::new(1, 1, 16).unwrap();
        let alpha = TorusFunction::trig(bx, amp, &[0], true, 1, false).unwrap();
        let d = invert_diffeo(&alpha).unwrap();
        let (cf, ci) = composition_pair(&d).unwrap();
        let w = function_from(bx, 0, 1, &c).real_part();
        let lhs = cf.compose(&ToeplitzOperator::multiplication(&w)).unwrap().compose(&ci).unwrap();
        let g = Grid::for_box(&bx, 4);
        let shifted: Vec<C64> = (0..g.len())
            .map(|i| {
                let (phi, x) = g.point(i);
                w.eval(&phi, x + alpha.eval(&phi, x).re)
            })
            .collect();
        let rhs = ToeplitzOperator::multiplication(&g.analyze(&shifted, bx).unwrap());
        for j in -8i64..=8 {
            for k in -8i64..=8 {
                prop_assert!((lhs.entry(&[0], j, k) - rhs.entry(&[0], j, k)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn transport_constant_is_even_in_omega(c1 in -1e-3..1e-3f64, c2 in -1e-3..1e-3f64, c3 in -1e-3..1e-3f64) {
        let bx = LatticeBox::new(1, 3, 6).unwrap();
        let a = TorusFunction::trig(bx, c1, &[1], true, 1, true).unwrap()
            .add(&TorusFunction::trig(bx, c2, &[1], false, 1, true).unwrap()).unwrap()
            .add(&TorusFunction::trig(bx, c3, &[0], true, 2, true).unwrap()).unwrap();
        let om = PI / 10.0;
        let p = solve_transport(&a, &[om], 0.01, 7.0, 1e-13, 60).unwrap();
        let m = solve_transport(&a.reflect_phi(), &[-om], 0.01, 7.0, 1e-13, 60).unwrap();
        prop_assert!((p.a_frak - m.a_frak).abs() <= 1e-15, "{} vs {}", p.a_frak, m.a_frak);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn pipeline_invariants_on_small_instances(eps in 1e-4..2e-3f64) {
        let bx = LatticeBox::new(1, 3, 6).unwrap();
        let c = KGCoefficients::reference(bx, eps, 1.0).unwrap();
        let st = run_pipeline(&c, &[PI / 10.0], PipelineConfig::default()).unwrap();
        for r in &st.records {
            prop_assert!(r.structure.max_violation() <= 1e-10, "{}: {:?}", r.label, r.structure);
        }
        let k = st.kam.as_ref().unwrap();
        prop_assert!(k.eps_sequence.windows(2).all(|w| w[1] < w[0]));
        for s in &k.steps {
            prop_assert!(s.max_imag_normal <= 1e-14);
        }
    }

    #[test]
    fn evolution_is_time_reversible(eps in 1e-4..1e-2f64, t in 1.0..20.0f64) {
        // With coefficients even in φ, s ↦ ψ(T − s) solves the equation started at −T.
        let bx = LatticeBox::new(1, 2, 6).unwrap();
        let c = KGCoefficients::reference(bx, eps, 1.0).unwrap();
        let om = [PI / 10.0];
        let fwd_cfg = EvolutionConfig::with_default_data(6, t, 1e-2);
        let fwd = evolve_original(&c, &om, &fwd_cfg).unwrap();
        let (psi, v) = to_real(fwd.states.last().unwrap(), 1.0, 6);
        let back_cfg = EvolutionConfig {
            t_start: -t,
            psi0: psi,
            v0: v.iter().map(|z| -z).collect(),
            ..fwd_cfg.clone()
        };
        let back = evolve_original(&c, &om, &back_cfg).unwrap();
        let (p2, v2) = to_real(back.states.last().unwrap(), 1.0, 6);
        for (a, b) in p2.iter().zip(&fwd_cfg.psi0) {
            prop_assert!((a - b).norm() <= 1e-9);
        }
        for (a, b) in v2.iter().zip(&fwd_cfg.v0) {
            prop_assert!((a + b).norm() <= 1e-9);
        }
    }

    #[test]
    fn config_round_trips(gamma in 0.001..0.49f64, tau in 3.0..12.0f64, kx in 2usize..20,
                          seed in any::<u64>(), w in prop::collection::vec(-0.5..0.5f64, 1..4)) {
        let c = RunConfig {
            gamma,
            tau,
            k_x: kx,
            seed,
            omega: OmegaSpec::List(vec![w]),
            ..RunConfig::default()
        };
        prop_assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
