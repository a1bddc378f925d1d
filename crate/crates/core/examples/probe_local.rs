use mbm_core::field::{fbf_deriv_path_fft, Side};
use mbm_core::grid::{SampledPath, TimeGrid};
use mbm_core::hurst::TheoryFrontier;
use mbm_core::noise::{gen_brownian, gen_fbm};
use mbm_core::regularity::{est_exponents, est_frontier, DyadicScales, FrontierCurve};
use std::time::Instant;

fn structure_slopes(vals: &[f64], step: f64, label: &str) {
    // empirical sd of increments at dyadic lags, restricted to the [0, 1] window
    let n = vals.len();
    let mut rows = Vec::new();
    for j in (6..=14).rev() {
        let lag_t = 2f64.powi(-j);
        let lag = (lag_t / step).round() as usize;
        if lag == 0 || lag >= n / 2 {
            continue;
        }
        let mut s2 = 0.0;
        let mut cnt = 0usize;
        let mut i = 0;
        while i + lag < n {
            let d = vals[i + lag] - vals[i];
            s2 += d * d;
            cnt += 1;
            i += lag.max(1);
        }
        let sd = (s2 / cnt as f64).sqrt();
        rows.push((j as f64, sd.log2()));
    }
    print!("{label}: slopes ");
    for w in rows.windows(2) {
        let sl = (w[0].1 - w[1].1) / (w[1].0 - w[0].0);
        print!("j{}-{}:{:.3} ", w[0].0, w[1].0, sl);
    }
    println!();
}

fn main() {
    let t0 = Instant::now();
    let step = 2f64.powi(-16);
    let g2 = TimeGrid::new(-4.0, 4.0, step).unwrap();
    let gs = FrontierCurve::default_sprime_grid();
    let theory = TheoryFrontier::FbmLike { h: 0.3 };

    // structure-function control: fbm vs derivative field
    {
        let gu = TimeGrid::new(0.0, 1.0, step).unwrap();
        let fbm = gen_fbm(&gu, 0.3, 5).unwrap();
        structure_slopes(fbm.values(), step, "fbm h=0.3      ");
        let bm2 = gen_brownian(&g2, 5);
        let d = fbf_deriv_path_fft(Side::Plus, &bm2, 0.3).unwrap();
        let i0 = g2.index_of(0.0).unwrap();
        let i1 = g2.index_of(1.0).unwrap();
        structure_slopes(&d.values()[i0..=i1], step, "deriv field     ");
    }

    for coarse in [2u32, 4, 6] {
        let sc = DyadicScales::new(coarse, 12).unwrap();
        for seed in [5u64, 7, 11, 23, 41] {
            let bm2 = gen_brownian(&g2, seed);
            let d = fbf_deriv_path_fft(Side::Plus, &bm2, 0.3).unwrap();
            let est = est_exponents(&d, 0.5, sc).unwrap();
            let fr = est_frontier(&d, 0.5, &gs, sc).unwrap();
            let dev0 = (fr.eval(0.0) - 0.3).abs();
            let mut worst = (0.0f64, 0.0f64);
            for (&sp, &sg) in fr.sprime().iter().zip(fr.sigma()) {
                if (-0.3..=1.0).contains(&sp) {
                    let dv = (sg - theory.eval(sp)).abs();
                    if dv > worst.1 {
                        worst = (sp, dv);
                    }
                }
            }
            println!(
                "coarse={coarse} seed {seed:2}: pw={:.3} loc={:.3} dev0={:.3} worst={:.3}@{:.2}",
                est.pointwise.value(),
                est.local.value(),
                dev0,
                worst.1,
                worst.0
            );
        }
    }
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
