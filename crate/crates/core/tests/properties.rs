//! Cross-module properties: builders against closed forms, coherent states
//! against their materialized vectors.

use gkvcs::assembly::{build_general, diag_sector, numeric_eigenvalues};
use gkvcs::fock::{inner, TruncationSpec};
use gkvcs::model::{FormulaVariant, ModelParams, SectorId, SpectrumFormula};
use gkvcs::quadrature::gauss_laguerre;
use gkvcs::vcs::{poisson_weight, tail_bound, FamilySpec, FamilyTag, Generator, GkParams, SectorLabels};
use proptest::prelude::*;

fn sector(bits: &str) -> SectorId {
    bits.parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagonal_spectrum_matches_closed_form(
        w in 0.5f64..2.0,
        e0 in -1.0f64..1.0,
        e1 in -1.0f64..1.0,
        g0 in 0.0f64..0.4,
        g1 in 0.0f64..0.4,
        bits in prop::sample::select(vec!["00", "01", "10", "11"]),
    ) {
        let p = ModelParams::diagonal(vec![w], vec![e0, e1], vec![g0, g1]).unwrap();
        let spec = TruncationSpec::uniform(1, 30, None, 2).unwrap();
        let k = sector(bits);
        let ev = numeric_eigenvalues(&diag_sector(&p, &spec, k).unwrap().h).unwrap();
        let levels = SpectrumFormula::new(FormulaVariant::Diag, &p, k).unwrap().levels(&p, 0, &[30]).unwrap();
        let mut analytic: Vec<f64> = levels.iter().map(|l| l.energy).collect();
        analytic.sort_by(f64::total_cmp);
        for i in 0..10 {
            prop_assert!((ev[i] - analytic[i]).abs() < 1e-8, "level {i}: {} vs {}", ev[i], analytic[i]);
        }
    }

    #[test]
    fn label_space_matches_materialized_states(
        j1 in 0.0f64..3.0,
        j2 in 0.0f64..3.0,
        g1 in -3.0f64..3.0,
        g2 in -3.0f64..3.0,
    ) {
        let p = ModelParams::diagonal(vec![1.0, 1.4], vec![0.5], vec![0.3]).unwrap();
        let spec = TruncationSpec::uniform(2, 16, None, 1).unwrap();
        let gen = Generator::new(&p, &spec, sector("1"), FamilySpec::of(FamilyTag::Multimode)).unwrap();
        let a = gen.build(&GkParams::single(sector("1"), SectorLabels::new(vec![j1, j2], vec![g1, g2])), 1e-3).unwrap();
        let b = gen.build(&GkParams::single(sector("1"), SectorLabels::new(vec![j2, j1], vec![g2, g1])), 1e-3).unwrap();
        let (sa, sb) = (a.state().unwrap(), b.state().unwrap());
        prop_assert!((sa.norm_sqr() - a.norm_sqr()).abs() < 1e-12);
        let z = inner(&sa, &sb).unwrap() - a.overlap(&b).unwrap();
        prop_assert!(z.norm() < 1e-12);
        // Product of single-mode sums: Σ_n p(J, n) over the kept range.
        let kept = |j: f64| (0..=16).map(|n| poisson_weight(j, n)).sum::<f64>();
        prop_assert!((a.norm_sqr() - kept(j1) * kept(j2)).abs() < 1e-13);
        prop_assert!(1.0 - a.norm_sqr() <= tail_bound(j1, 16) + tail_bound(j2, 16) + 1e-14);
    }

    #[test]
    fn general_hamiltonian_is_hermitian(
        g in 0.0f64..0.4,
        gp in 0.0f64..0.4,
        x in 0.01f64..0.3,
        om in 0.5f64..2.0,
    ) {
        let p = ModelParams::diagonal(vec![1.0], vec![0.5, 0.9], vec![g, 0.1]).unwrap()
            .with_cm(om, gp).unwrap()
            .with_extra(vec![vec![vec![0.0, x], vec![x, 0.0]]]).unwrap();
        let spec = TruncationSpec::uniform(1, 5, Some(5), 2).unwrap();
        let b = build_general(&p, &spec).unwrap();
        prop_assert!(b.max_hermitian_defect() <= 1e-12);
    }

    #[test]
    fn gauss_laguerre_moments_are_factorials(q in 1usize..30) {
        let rule = gauss_laguerre(q).unwrap();
        let mut fact = 1.0f64;
        for n in 0..2 * q {
            if n > 0 {
                fact *= n as f64;
            }
            let m = rule.integrate(|x| x.powi(n as i32));
            prop_assert!((m - fact).abs() <= 1e-10 * fact, "Q={q} n={n}: {m} vs {fact}");
        }
    }
}
