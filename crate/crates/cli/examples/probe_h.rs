use mbm_core::field::fbf_deriv_path_fft;
use mbm_core::field::Side;
use mbm_core::grid::TimeGrid;
use mbm_core::hurst::TheoryFrontier;
use mbm_core::noise::{gen_brownian, gen_fbm};
use mbm_core::regularity::{est_exponents, est_frontier, DyadicScales, FrontierCurve};

fn worst_gap(
    sprime: &[f64],
    sigma: &[f64],
    range: (f64, f64),
    theory: impl Fn(f64) -> f64,
) -> f64 {
    let mut worst = 0.0f64;
    for (i, &sp) in sprime.iter().enumerate() {
        if sp < range.0 || sp > range.1 {
            continue;
        }
        worst = worst.max((sigma[i] - theory(sp)).abs());
    }
    worst
}

fn main() {
    let sc = DyadicScales::new(2, 12).unwrap();
    let sgrid = FrontierCurve::default_sprime_grid();
    let theory = TheoryFrontier::FbmLike { h: 0.3 };
    println!("-- fbm direct rows (gen_fbm seed): pw loc gap");
    for seed in 1u64..=16 {
        let f = gen_fbm(&tg(0.0, 1.0), 0.3, seed).unwrap();
        let est = est_exponents(&f, 0.5, sc).unwrap();
        let fr = est_frontier(&f, 0.5, &sgrid, sc).unwrap();
        let gap = worst_gap(fr.sprime(), fr.sigma(), (-0.3, 1.0), |sp| theory.eval(sp));
        let ok = (est.pointwise.value() - 0.3).abs() <= 0.1
            && (est.local.value() - 0.3).abs() <= 0.1
            && gap <= 0.1;
        println!(
            "  seed {seed:>2}: {:.3} {:.3} {gap:.3}{}",
            est.pointwise.value(),
            est.local.value(),
            if ok { "  OK" } else { "" }
        );
    }
    for &(lo, hi) in &[(3u32, 12u32), (4, 12), (3, 13), (4, 13)] {
        let scd = DyadicScales::new(lo, hi).unwrap();
        println!("-- derivative rows scales ({lo},{hi}): pw loc gap");
        for seed in [5u64, 7, 22, 49, 1, 2, 4, 12] {
            let bm = gen_brownian(&TimeGrid::new(-4.0, 4.0, 2f64.powi(-16)).unwrap(), seed);
            let df = fbf_deriv_path_fft(Side::Plus, &bm, 0.3).unwrap();
            let est = est_exponents(&df, 0.5, scd).unwrap();
            let fr = est_frontier(&df, 0.5, &sgrid, scd).unwrap();
            let gap = worst_gap(fr.sprime(), fr.sigma(), (-0.3, 1.0), |sp| theory.eval(sp));
            let ok = (est.pointwise.value() - 0.3).abs() <= 0.1
                && (est.local.value() - 0.3).abs() <= 0.1
                && gap <= 0.1;
            println!(
                "  seed {seed:>2}: {:.3} {:.3} {gap:.3}{}",
                est.pointwise.value(),
                est.local.value(),
                if ok { "  OK" } else { "" }
            );
        }
    }
}

fn tg(a: f64, b: f64) -> TimeGrid {
    TimeGrid::new(a, b, 2f64.powi(-16)).unwrap()
}
